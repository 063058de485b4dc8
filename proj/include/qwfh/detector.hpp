#pragma once

#include <Eigen/Dense>

namespace qwfh::detector {

/// Binomial loss channel, L(m, n) = C(n, m) eta^m (1 - eta)^(n - m).
struct LossMatrix {
    double eta = 1.0;
    Eigen::MatrixXd L;
};

/// Click-binning map of a time-multiplexed detector with `bins` equally
/// weighted slots. C(k, n) is the probability that n photons light up
/// exactly k slots; the matrix is (bins + 1) x (n_max + 1).
struct BinningMatrix {
    int bins = 8;
    Eigen::MatrixXd C;
};

/// Reflectivity modulation of a geometric phase rotator,
/// r(Theta) = r0 sqrt(1 + v cos(4 Theta + theta0)).
struct GprModel {
    double r0 = 0.5;
    double v = 0.0;
    double theta0 = 0.0;

    void validate() const;
};

/// Joint click probabilities P(m, m') for m, m' in [0, bins].
struct JointClickMatrix {
    Eigen::MatrixXd P;
    double truncation_deficit = 0.0;

    double total() const { return P.sum(); }
};

inline constexpr int kDefaultBins = 8;

LossMatrix loss_matrix(double eta, int n_max);
BinningMatrix binning_matrix(int bins, int n_max);

/// P = C_A L(eta_A) F L(eta_B)^T C_B^T.
JointClickMatrix apply_response(const Eigen::MatrixXd& F, double eta_a, double eta_b, int bins = kDefaultBins);

/// p = C L(eta) f.
Eigen::VectorXd apply_response(const Eigen::VectorXd& f, double eta, int bins = kDefaultBins);

/// Least-squares inversion of the response on the photon-number block
/// n, n' <= support. Solved through the normal equations of each side's
/// truncated response; throws IllConditioned when that truncated response
/// has a condition number above max_condition.
Eigen::MatrixXd invert_response(const Eigen::MatrixXd& P, double eta_a, double eta_b, int bins, int support,
                                double max_condition = 1e8);

Eigen::VectorXd invert_response(const Eigen::VectorXd& p, double eta, int bins, int support,
                                double max_condition = 1e8);

/// Source weights read off an inverted photon statistics matrix:
/// w0 = F(0,0), w1 = F(1,0) + F(0,1).
struct SourceWeights {
    double w0 = 0.0;
    double w1 = 0.0;
};

SourceWeights estimate_source_weights(const Eigen::MatrixXd& P, double eta_a, double eta_b, int bins,
                                      int support = 2);

double gpr_reflectivity(double theta, const GprModel& model);
double gpr_transmittivity(double theta, const GprModel& model);

} // namespace qwfh::detector
