#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace testing {

// Plain O(N^2) DFT; returns |X_k|^2 for k = 0..N/2.
inline std::vector<double> harmonic_power(const std::vector<double>& x) {
    const std::size_t N = x.size();
    std::vector<double> out(N / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::complex<double> s = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            s += x[n] * std::polar(1.0, -2.0 * M_PI * double(k * n) / double(N));
        }
        out[k] = std::norm(s);
    }
    return out;
}

inline double harmonic_phase(const std::vector<double>& x, int k) {
    std::complex<double> s = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        s += x[n] * std::polar(1.0, -2.0 * M_PI * double(k * n) / double(x.size()));
    }
    return std::arg(s);
}

inline double max_abs(const Eigen::MatrixXd& m) {
    return m.cwiseAbs().maxCoeff();
}

} // namespace testing
