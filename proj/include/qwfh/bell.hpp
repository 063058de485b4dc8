#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qwfh/fock.hpp"

// CGLMP analysis of a two-mode squeezed vacuum probed by two weak-field
// homodyne detectors that monitor all four output ports.
//
// Side A mixes the signal mode s with LO mode 1, side B mixes the idler i
// with LO mode 2:
//   a_s^+ = t1 d1^+ + r1^* e1^+,   b1^+ = r1 d1^+ - t1 e1^+
//   a_i^+ = t2 d2^+ + r2^* e2^+,   b2^+ = r2 d2^+ - t2 e2^+
// d_j are the transmitted ports and e_j the reflected ones. An outcome on a
// side is Gamma, the number of transmitted photons, given M photons there.
namespace qwfh::bell {

struct PbsPair {
    double t1 = M_SQRT1_2;
    cplx r1{0.0, -M_SQRT1_2};
    double t2 = M_SQRT1_2;
    cplx r2{0.0, -M_SQRT1_2};

    /// t_j in [0, 1] and r_j = -i sqrt(1 - t_j^2).
    static PbsPair from_transmittivities(double t1, double t2);
};

struct BellSettings {
    int M = 2;
    cplx lambda = 0.0;
    std::array<cplx, 2> alpha{};  // LO settings on side A
    std::array<cplx, 2> beta{};   // LO settings on side B
    PbsPair pbs;

    void validate() const;
};

/// Q(Gamma_A, Gamma_B) conditioned on exactly M photons per side.
struct OutcomeTable {
    Eigen::MatrixXd Q;
    /// Unconditioned probability of the M-per-side sector.
    double sector_weight = 0.0;
};

/// Settings pairs in CGLMP order: (a, b), (a', b), (a', b'), (a, b').
inline constexpr std::array<std::array<int, 2>, 4> kSettingPairs{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};

/// Normalized-ket amplitudes of the four-photon (M = 2) output, in the order
/// |2200>, |0022>, |2002>, |0220>, |1111>, |2101>, |1210>, |0121>, |1012>,
/// kets written as |n_1t n_2t n_1r n_2r>. Includes the global factor
/// sqrt(1 - |lambda|^2) exp(-|alpha|^2 / 2) exp(-|beta|^2 / 2).
std::array<cplx, 9> output_amplitudes_m2(const BellSettings& s, int a_idx, int b_idx);

/// Photon numbers (1t, 2t, 1r, 2r) of each ket of output_amplitudes_m2.
inline constexpr std::array<std::array<int, 4>, 9> kM2Kets{{{2, 2, 0, 0},
                                                            {0, 0, 2, 2},
                                                            {2, 0, 0, 2},
                                                            {0, 2, 2, 0},
                                                            {1, 1, 1, 1},
                                                            {2, 1, 0, 1},
                                                            {1, 2, 1, 0},
                                                            {0, 1, 2, 1},
                                                            {1, 0, 1, 2}}};

/// Unconditioned amplitudes of the sector with n_a photons on side A and n_b
/// on side B, indexed by (Gamma_A, Gamma_B).
Eigen::MatrixXcd sector_amplitudes(const BellSettings& s, int a_idx, int b_idx, int n_a, int n_b);

OutcomeTable layer_probabilities(const BellSettings& s, int a_idx, int b_idx);

/// The four tables of kSettingPairs.
std::array<OutcomeTable, 4> setting_tables(const BellSettings& s);

/// P(A - B = eps mod D) = sum_G Q(G, (G - eps) mod D).
double outcome_difference_probability(const Eigen::MatrixXd& Q, int eps);

/// I_M for tables ordered as kSettingPairs.
double cglmp_I(const std::array<Eigen::MatrixXd, 4>& tables, int M);
double cglmp_I(const std::array<OutcomeTable, 4>& tables, int M);

/// I_3 written out term by term through the projector expectations <P_kk'>,
/// where k, k' count photons on the reflected ports. Each table is indexed
/// as P(k, k') and ordered as kSettingPairs.
double i3_from_projectors(const std::array<Eigen::Matrix3d, 4>& projectors);

/// <P_kk'> table from a Gamma-indexed M = 2 outcome table.
Eigen::Matrix3d projector_table(const Eigen::MatrixXd& Q);

/// Largest CGLMP value quantum mechanics allows for D = M + 1 outcomes.
double quantum_cglmp_bound(int M);

struct SearchConfig {
    int starts = 64;
    std::uint64_t seed = 0x5eed5eedULL;
    int max_iterations = 4000;
    double simplex_tolerance = 1e-9;
    double lambda_max = 0.95;
    double lo_max = 2.0;
    bool free_beam_splitters = false;
    bool fix_lambda_zero = false;
    int threads = 1;
};

struct StartTrace {
    int index = 0;
    double initial_value = 0.0;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Squashed parameters within 1e-4 (relative) of a search-range edge.
    int boundary_hits = 0;
};

struct OptimizationResult {
    BellSettings best;
    double value = 0.0;
    int best_start = 0;
    std::vector<StartTrace> starts;
    double converged_fraction = 0.0;
    int boundary_hits = 0;
};

OptimizationResult optimize_IM(int M, const SearchConfig& config = {});

struct LossDecomposition {
    int M = 0;
    double eta = 1.0;
    /// Unconditioned M-per-side outcome probabilities with every port lossy.
    Eigen::MatrixXd lossy;
    /// Lossless M-per-side probabilities P_M.
    Eigen::MatrixXd ideal;
    /// Single-photon-loss feed from the (M+1, M) and (M, M+1) sectors,
    /// multiplicities included.
    Eigen::MatrixXd nu;
    /// lossy / eta^(2M) - (P_M + (1 - eta) nu), the second-order remainder.
    Eigen::MatrixXd residual;
    double residual_norm = 0.0;  // max |residual|
};

/// Sectors with more than max_photons per side are dropped.
LossDecomposition lossy_layer_check(int M, double eta, const BellSettings& s, int a_idx = 0, int b_idx = 0,
                                    int max_photons = 0);

} // namespace qwfh::bell
