#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace qwfh {

using cplx = std::complex<double>;

/// Highest photon number retained per mode.
class FockCutoff {
public:
    explicit FockCutoff(int n_max);

    int n_max() const { return n_max_; }
    int dim() const { return n_max_ + 1; }

    friend bool operator==(FockCutoff, FockCutoff) = default;

private:
    int n_max_;
};

/// Two-port beam splitter in the asymmetric convention
///   a_in^+ -> t a_out1^+ + r b_out^+,   b_in^+ -> t b_out^+ - r^* a_out1^+
/// with real t and |t|^2 + |r|^2 = 1.
struct BeamSplitter {
    double t = 1.0;
    cplx r = 0.0;

    static BeamSplitter make(double t, cplx r);
    static BeamSplitter from_transmittivity(double t);
    static BeamSplitter balanced();

    double r_abs() const { return std::abs(r); }
};

namespace fock {

/// Largest n for which n! is representable as a double.
inline constexpr int kMaxFactorial = 170;

double factorial(int n);
double sqrt_factorial(int n);
double binomial(int n, int k);

/// <m | alpha; n> where |alpha; n> = D(alpha) (a^+)^n |0>.
///
/// The state is not normalized: <alpha; n | alpha; m> = n! delta_nm.
/// Throws CutoffExceeded when m or n exceeds kMaxFactorial.
cplx displaced_fock_overlap(int m, cplx alpha, int n);

/// Matrix O(m, n) = <m | alpha; n> for m <= m_max, n <= n_max.
Eigen::MatrixXcd displaced_fock_overlaps(cplx alpha, int m_max, int n_max);

/// Displacement carried by each output port when an LO of amplitude alpha
/// enters the beam splitter: (-r alpha on out1, t alpha on out2).
std::pair<cplx, cplx> bs_split_displacement(cplx alpha, const BeamSplitter& bs);

} // namespace fock
} // namespace qwfh
