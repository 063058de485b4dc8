#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qwfh/fock.hpp"
#include "qwfh/states.hpp"

// Brute-force reference: builds the whole optical circuit as a dense
// truncated-Fock tensor and reads photon statistics off the diagonal. It
// depends only on the Fock primitives, the state containers and the
// detector matrices.
namespace qwfh::oracle {

/// Mode matrix S of a two-port linear element: in_i^+ -> sum_j S(i, j) out_j^+.
using ModeMatrix = Eigen::Matrix2cd;

/// Asymmetric convention: a^+ -> t c^+ + r d^+, b^+ -> -r^* c^+ + t d^+.
ModeMatrix asymmetric_mode_matrix(const BeamSplitter& bs);

/// PBS of the four-port Bell layout: a^+ -> t d^+ + r^* e^+, b^+ -> r d^+ - t e^+.
ModeMatrix pbs_mode_matrix(double t, cplx r);

/// Fock-space unitary of a two-mode element on the (cutoff + 1)^2 grid,
/// indexed n_a * (cutoff + 1) + n_b. Built by exponentiating the Hermitian
/// generator sum_ij K(i, j) a_i^+ a_j in every photon-number block with total
/// n <= cutoff; blocks above the cutoff are left at zero.
Eigen::MatrixXcd mode_unitary(const ModeMatrix& S, int cutoff);

Eigen::MatrixXcd bs_unitary(double t, cplx r, int cutoff);

/// Truncated coherent-state column <n | alpha>, n <= cutoff.
Eigen::VectorXcd coherent_column(cplx alpha, int cutoff);

enum class KeepArms { transmitted, all };

struct CircuitSpec {
    TwoModeState input;
    /// LO amplitude entering the second port on each side.
    std::array<cplx, 2> lo{};
    std::array<ModeMatrix, 2> element{ModeMatrix::Identity(), ModeMatrix::Identity()};
    KeepArms keep = KeepArms::transmitted;
};

/// LO amplitude that, sent through S, leaves displacement `detected` on the
/// first output port.
cplx lo_input_for_detected_displacement(cplx detected, const ModeMatrix& S);

/// Joint photon statistics over the kept arms. For KeepArms::transmitted the
/// tensor is (cutoff + 1)^2 over (A_out1, B_out1); for KeepArms::all it is
/// (cutoff + 1)^4 over (A_out1, A_out2, B_out1, B_out2).
struct PhotonStatistics {
    int dim = 0;
    int arms = 0;
    std::vector<double> probs;

    double at(int m, int mp) const { return probs[static_cast<std::size_t>(m) * dim + mp]; }
    double at(int d1, int e1, int d2, int e2) const;
    Eigen::MatrixXd matrix() const;
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{2} << 30;

PhotonStatistics simulate_circuit(const CircuitSpec& spec, int cutoff,
                                  std::size_t memory_budget = kDefaultMemoryBudget);

/// Cutoff satisfying cutoff >= |alpha|^2 + 8 |alpha| + 10 for the largest LO
/// input, plus the signal's own photon range.
int recommended_cutoff(const CircuitSpec& spec);

/// Click statistics of a transmitted-arms simulation through the detector
/// response.
Eigen::MatrixXd click_statistics(const PhotonStatistics& stats, double eta_a, double eta_b, int bins);

} // namespace qwfh::oracle
