#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qwfh/detector.hpp"
#include "qwfh/fock.hpp"
#include "qwfh/states.hpp"

// Weak-field homodyne: photon statistics of a signal interfered with a weak
// local oscillator on a beam splitter, one detected output per side.
namespace qwfh::homodyne {

/// One homodyne arm.
///
/// The LO amplitude alpha = lo_magnitude * exp(i lo_phase) is referenced so
/// that the detected output carries the displacement t * alpha, while the
/// signal reaches it with amplitude t and the undetected port with r.
struct WfhChannel {
    double lo_magnitude = 0.0;
    double lo_phase = 0.0;
    BeamSplitter bs = BeamSplitter::balanced();
    /// When set, the beam splitter follows the rotator: r = r(lo_phase / 4).
    std::optional<detector::GprModel> gpr;
    double eta = 1.0;
    int bins = detector::kDefaultBins;

    cplx lo() const { return std::polar(lo_magnitude, lo_phase); }
    BeamSplitter effective_bs() const;
    cplx detected_displacement() const;
};

/// Joint photon statistics Phi(m, m') before the detector response.
struct JointPhotonStats {
    Eigen::MatrixXd F;
    double truncation_deficit = 0.0;
};

/// Photon cutoff for the detected arms that keeps the LO tail below ~1e-13.
int default_photon_cutoff(int signal_n_max, const WfhChannel& a, const WfhChannel& b);

/// phi(m), m <= m_max, for a pure single-mode input with coefficients c_n.
Eigen::VectorXd single_mode_stats(const Eigen::VectorXcd& c, const WfhChannel& ch, int m_max);

/// Phi(m, m') for a pure two-mode input c(n, n').
Eigen::MatrixXd joint_photon_stats(const Eigen::MatrixXcd& c, const WfhChannel& a, const WfhChannel& b, int m_max);

/// Phi(m, m') for any two-mode state; mixed states are split into pure
/// components and recombined.
JointPhotonStats joint_photon_stats(const TwoModeState& state, const WfhChannel& a, const WfhChannel& b, int m_max);

/// Photon statistics followed by each channel's detector response.
detector::JointClickMatrix joint_click_stats(const TwoModeState& state, const WfhChannel& a, const WfhChannel& b,
                                             int m_max = 0);

enum class ScanAxis { difference, sum };

struct PhaseScan {
    ScanAxis axis = ScanAxis::difference;
    /// Phase of the scan axis in radians; the rotator setting is grid / 4.
    std::vector<double> grid;
    std::vector<detector::JointClickMatrix> results;
};

struct ScanOptions {
    std::vector<double> grid;
    int threads = 1;
    int photon_cutoff = 0;  // 0 picks default_photon_cutoff
};

/// n uniformly spaced phases covering [0, 2 pi).
std::vector<double> uniform_grid(int points = 72);

/// At grid point phi the A-side LO phase is a.lo_phase + phi and the B side
/// stays at b.lo_phase, so phi shifts both phi_A - phi_B and phi_A + phi_B.
PhaseScan ssps_scan(double w0, double w1, const WfhChannel& a, const WfhChannel& b,
                    const std::optional<detector::GprModel>& gpr_a, const std::optional<detector::GprModel>& gpr_b,
                    const ScanOptions& options);

PhaseScan tmss_scan(cplx lambda, double p, const WfhChannel& a, const WfhChannel& b,
                    const std::optional<detector::GprModel>& gpr_a, const std::optional<detector::GprModel>& gpr_b,
                    const ScanOptions& options);

/// Curve P(m, m') over the scan.
std::vector<double> scan_curve(const PhaseScan& scan, int m, int mp);

} // namespace qwfh::homodyne
