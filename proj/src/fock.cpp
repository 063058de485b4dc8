#include "qwfh/fock.hpp"

#include <array>
#include <cmath>
#include <string>

#include "qwfh/errors.hpp"

namespace qwfh {

FockCutoff::FockCutoff(int n_max) : n_max_(n_max) {
    if (n_max < 1) {
        throw InvalidArgument("Fock cutoff must be at least 1, got " + std::to_string(n_max));
    }
}

BeamSplitter BeamSplitter::make(double t, cplx r) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw InvalidArgument("beam splitter transmittivity must lie in [0, 1]");
    }
    if (std::abs(t * t + std::norm(r) - 1.0) > 1e-12) {
        throw InvalidArgument("beam splitter violates |t|^2 + |r|^2 = 1");
    }
    return BeamSplitter{t, r};
}

BeamSplitter BeamSplitter::from_transmittivity(double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw InvalidArgument("beam splitter transmittivity must lie in [0, 1]");
    }
    return BeamSplitter{t, cplx(std::sqrt(1.0 - t * t), 0.0)};
}

BeamSplitter BeamSplitter::balanced() {
    return BeamSplitter{M_SQRT1_2, cplx(M_SQRT1_2, 0.0)};
}

namespace fock {
namespace {

struct FactorialTables {
    std::array<double, kMaxFactorial + 1> fact{};
    std::array<double, kMaxFactorial + 1> sqrt_fact{};

    FactorialTables() {
        fact[0] = 1.0;
        for (int n = 1; n <= kMaxFactorial; ++n) {
            fact[n] = fact[n - 1] * n;
        }
        for (int n = 0; n <= kMaxFactorial; ++n) {
            sqrt_fact[n] = std::sqrt(fact[n]);
        }
    }
};

const FactorialTables& tables() {
    static const FactorialTables t;
    return t;
}

void check_range(int n) {
    if (n < 0 || n > kMaxFactorial) {
        throw CutoffExceeded("photon number " + std::to_string(n) +
                             " outside the factorial table [0, " + std::to_string(kMaxFactorial) + "]");
    }
}

cplx ipow(cplx z, int k) {
    cplx out = 1.0;
    for (int i = 0; i < k; ++i) {
        out *= z;
    }
    return out;
}

} // namespace

double factorial(int n) {
    check_range(n);
    return tables().fact[n];
}

double sqrt_factorial(int n) {
    check_range(n);
    return tables().sqrt_fact[n];
}

double binomial(int n, int k) {
    if (k < 0 || k > n) {
        return 0.0;
    }
    k = std::min(k, n - k);
    double out = 1.0;
    for (int i = 1; i <= k; ++i) {
        out = out * (n - k + i) / i;
    }
    // exact integers below 2^53
    return out < 9.0e15 ? std::round(out) : out;
}

cplx displaced_fock_overlap(int m, cplx alpha, int n) {
    check_range(m);
    check_range(n);
    const cplx minus_conj = -std::conj(alpha);
    cplx sum = 0.0;
    for (int kappa = 0; kappa <= std::min(m, n); ++kappa) {
        // C(n, kappa) (-alpha^*)^(n-kappa) alpha^(m-kappa) sqrt(m!) / (m-kappa)!
        const double coeff = binomial(n, kappa) * tables().sqrt_fact[m] / tables().fact[m - kappa];
        sum += coeff * ipow(minus_conj, n - kappa) * ipow(alpha, m - kappa);
    }
    return sum * std::exp(-0.5 * std::norm(alpha));
}

Eigen::MatrixXcd displaced_fock_overlaps(cplx alpha, int m_max, int n_max) {
    Eigen::MatrixXcd out(m_max + 1, n_max + 1);
    for (int m = 0; m <= m_max; ++m) {
        for (int n = 0; n <= n_max; ++n) {
            out(m, n) = displaced_fock_overlap(m, alpha, n);
        }
    }
    return out;
}

std::pair<cplx, cplx> bs_split_displacement(cplx alpha, const BeamSplitter& bs) {
    return {-bs.r * alpha, bs.t * alpha};
}

} // namespace fock
} // namespace qwfh
