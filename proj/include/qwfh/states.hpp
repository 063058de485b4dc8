#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qwfh/fock.hpp"

namespace qwfh {

/// Photon-number mixture sum_n w_n |n><n| of a single mode.
struct SingleModeMixture {
    std::vector<double> weights;  // weights[n] = w_n

    int max_photons() const { return static_cast<int>(weights.size()) - 1; }
};

/// One pure component of a mixed state: weight * |psi><psi|, with psi
/// stored as a coefficient matrix c(n, n').
struct PureComponent {
    double weight = 1.0;
    Eigen::MatrixXcd coeffs;
};

/// Two bosonic modes (A, B) truncated at a common cutoff.
///
/// Pure states keep c(n, n') for |n>_A |n'>_B. Mixed states keep the density
/// matrix over the flattened index n * dim + n'.
class TwoModeState {
public:
    enum class Kind { pure, mixed };

    static TwoModeState pure(Eigen::MatrixXcd coeffs, double truncation_deficit = 0.0);
    static TwoModeState mixed(Eigen::MatrixXcd density, int dim, double truncation_deficit = 0.0);

    Kind kind() const { return kind_; }
    bool is_pure() const { return kind_ == Kind::pure; }
    FockCutoff cutoff() const { return FockCutoff(dim_ - 1); }
    int dim() const { return dim_; }

    /// Probability mass lost to truncation, reported next to the state.
    double truncation_deficit() const { return deficit_; }

    const Eigen::MatrixXcd& coeffs() const;
    const Eigen::MatrixXcd& density() const { return density_; }

    /// rho(n n', m m') for either kind.
    cplx rho(int n, int np, int m, int mp) const;
    double trace() const;

    /// Joint populations p(n, n').
    Eigen::MatrixXd populations() const;
    Eigen::VectorXd marginal_a() const;
    Eigen::VectorXd marginal_b() const;

    /// Convex decomposition into pure components. Mixed states go through a
    /// Hermitian eigendecomposition; eigenvalues at or below drop_below are
    /// discarded.
    std::vector<PureComponent> pure_components(double drop_below = 1e-15) const;

private:
    TwoModeState() = default;

    Kind kind_ = Kind::pure;
    int dim_ = 0;
    double deficit_ = 0.0;
    Eigen::MatrixXcd coeffs_;
    Eigen::MatrixXcd density_;
};

namespace states {

SingleModeMixture make_ssps_input(double w0, double w1);

/// Pure coefficients of Fock state |n> split on a balanced beam splitter,
/// a^+ -> (a_A^+ + a_B^+)/sqrt(2), on a dim x dim grid.
Eigen::MatrixXcd split_fock_layer(int n, int dim);

/// Mixture sum_n w_n |psi_n><psi_n| with psi_n = split_fock_layer(n).
TwoModeState split_on_balanced_bs(const SingleModeMixture& input);

/// Default TMSS cutoff: max(8, ceil(4 |lambda|^2 / (1 - |lambda|^2)) + 8).
FockCutoff default_tmss_cutoff(cplx lambda);

TwoModeState make_tmss(cplx lambda, FockCutoff cutoff);

/// (1 - p) |TMSS><TMSS| + p |0>_A|1>_B <0|_A<1|_B.
TwoModeState make_noisy_tmss(cplx lambda, double p, FockCutoff cutoff);

/// <n(n-1)> / <n>^2 of a photon-number distribution.
double g2_of_distribution(const Eigen::VectorXd& f);

std::string to_json(const TwoModeState& state);
TwoModeState from_json(const std::string& text);

} // namespace states
} // namespace qwfh
