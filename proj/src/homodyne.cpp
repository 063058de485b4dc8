#include "qwfh/homodyne.hpp"

#include <cmath>

#include "qwfh/errors.hpp"
#include "qwfh/parallel.hpp"

namespace qwfh::homodyne {
namespace {

// T_k(m, n) = sqrt(k!) |r|^k C(n, k) t^(n-k) <m | t alpha; n-k> / sqrt(n!)
//
// The amplitude for m detected photons with k photons routed to the
// undetected port is sum_n T_k(m, n) c_n; the sqrt(k!) carries the norm of
// the undetected displaced Fock state and 1/sqrt(n!) turns (a^+)^n into |n>.
std::vector<Eigen::MatrixXcd> transfer_matrices(const WfhChannel& ch, int n_max, int m_max) {
    const BeamSplitter bs = ch.effective_bs();
    const Eigen::MatrixXcd overlaps = fock::displaced_fock_overlaps(ch.detected_displacement(), m_max, n_max);
    const double r = bs.r_abs();
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(n_max + 1);
    for (int k = 0; k <= n_max; ++k) {
        Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(m_max + 1, n_max + 1);
        const double rk = fock::sqrt_factorial(k) * std::pow(r, k);
        for (int n = k; n <= n_max; ++n) {
            const double w = rk * fock::binomial(n, k) * std::pow(bs.t, n - k) / fock::sqrt_factorial(n);
            if (w != 0.0) {
                T.col(n) = w * overlaps.col(n - k);
            }
        }
        out.push_back(std::move(T));
    }
    return out;
}

detector::JointClickMatrix click_stats_at(const TwoModeState& state, const WfhChannel& a, const WfhChannel& b,
                                          int m_max) {
    const JointPhotonStats stats = joint_photon_stats(state, a, b, m_max);
    if (a.bins != b.bins) {
        throw DimensionMismatch("both detectors must have the same number of bins");
    }
    detector::JointClickMatrix out = detector::apply_response(stats.F, a.eta, b.eta, a.bins);
    out.truncation_deficit = stats.truncation_deficit;
    return out;
}

WfhChannel shifted(WfhChannel ch, double phase, const std::optional<detector::GprModel>& gpr) {
    ch.lo_phase += phase;
    if (gpr) {
        ch.gpr = gpr;
    }
    return ch;
}

int scan_cutoff(const ScanOptions& options, int signal_n_max, const WfhChannel& a, const WfhChannel& b) {
    return options.photon_cutoff > 0 ? options.photon_cutoff : default_photon_cutoff(signal_n_max, a, b);
}

} // namespace

BeamSplitter WfhChannel::effective_bs() const {
    if (!gpr) {
        return bs;
    }
    const double r = detector::gpr_reflectivity(lo_phase / 4.0, *gpr);
    return BeamSplitter{std::sqrt(1.0 - r * r), cplx(r, 0.0)};
}

cplx WfhChannel::detected_displacement() const {
    return fock::bs_split_displacement(lo(), effective_bs()).second;
}

int default_photon_cutoff(int signal_n_max, const WfhChannel& a, const WfhChannel& b) {
    const double g = std::max(a.lo_magnitude, b.lo_magnitude);
    return signal_n_max + static_cast<int>(std::ceil(g * g + 8.0 * g + 10.0));
}

Eigen::VectorXd single_mode_stats(const Eigen::VectorXcd& c, const WfhChannel& ch, int m_max) {
    const int n_max = static_cast<int>(c.size()) - 1;
    if (n_max < 0) {
        throw DimensionMismatch("empty coefficient vector");
    }
    const auto T = transfer_matrices(ch, n_max, m_max);
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(m_max + 1);
    for (const auto& Tk : T) {
        phi += (Tk * c).cwiseAbs2();
    }
    return phi;
}

Eigen::MatrixXd joint_photon_stats(const Eigen::MatrixXcd& c, const WfhChannel& a, const WfhChannel& b, int m_max) {
    if (c.rows() != c.cols()) {
        throw DimensionMismatch("two-mode coefficients must be square");
    }
    const int n_max = static_cast<int>(c.rows()) - 1;
    const auto Ta = transfer_matrices(a, n_max, m_max);
    const auto Tb = transfer_matrices(b, n_max, m_max);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(m_max + 1, m_max + 1);
    for (int k = 0; k <= n_max; ++k) {
        const Eigen::MatrixXcd left = Ta[k] * c;
        if (left.squaredNorm() == 0.0) {
            continue;
        }
        for (int kp = 0; kp <= n_max; ++kp) {
            F += (left * Tb[kp].transpose()).cwiseAbs2();
        }
    }
    return F;
}

JointPhotonStats joint_photon_stats(const TwoModeState& state, const WfhChannel& a, const WfhChannel& b, int m_max) {
    JointPhotonStats out;
    out.F = Eigen::MatrixXd::Zero(m_max + 1, m_max + 1);
    for (const auto& comp : state.pure_components()) {
        out.F += comp.weight * joint_photon_stats(comp.coeffs, a, b, m_max);
    }
    out.truncation_deficit = 1.0 - out.F.sum();
    return out;
}

detector::JointClickMatrix joint_click_stats(const TwoModeState& state, const WfhChannel& a, const WfhChannel& b,
                                             int m_max) {
    if (m_max <= 0) {
        m_max = default_photon_cutoff(state.cutoff().n_max(), a, b);
    }
    return click_stats_at(state, a, b, m_max);
}

std::vector<double> uniform_grid(int points) {
    if (points < 1) {
        throw InvalidArgument("scan grid needs at least one point");
    }
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) {
        grid[i] = 2.0 * M_PI * i / points;
    }
    return grid;
}

PhaseScan ssps_scan(double w0, double w1, const WfhChannel& a, const WfhChannel& b,
                    const std::optional<detector::GprModel>& gpr_a, const std::optional<detector::GprModel>& gpr_b,
                    const ScanOptions& options) {
    const SingleModeMixture input = states::make_ssps_input(w0, w1);
    constexpr int dim = 3;
    std::vector<TwoModeState> layers;
    for (int k = 0; k <= input.max_photons(); ++k) {
        layers.push_back(TwoModeState::pure(states::split_fock_layer(k, dim)));
    }
    const int m_max = scan_cutoff(options, dim - 1, a, b);

    PhaseScan scan;
    scan.axis = ScanAxis::difference;
    scan.grid = options.grid.empty() ? uniform_grid() : options.grid;
    scan.results.resize(scan.grid.size());
    parallel_for(scan.grid.size(), options.threads, [&](std::size_t i) {
        const WfhChannel ca = shifted(a, scan.grid[i], gpr_a);
        const WfhChannel cb = shifted(b, 0.0, gpr_b);
        detector::JointClickMatrix total;
        total.P = Eigen::MatrixXd::Zero(a.bins + 1, b.bins + 1);
        for (int k = 0; k <= input.max_photons(); ++k) {
            const double w = input.weights[k];
            if (w == 0.0) {
                continue;
            }
            const auto layer = click_stats_at(layers[k], ca, cb, m_max);
            total.P += w * layer.P;
            total.truncation_deficit += w * layer.truncation_deficit;
        }
        scan.results[i] = std::move(total);
    });
    return scan;
}

PhaseScan tmss_scan(cplx lambda, double p, const WfhChannel& a, const WfhChannel& b,
                    const std::optional<detector::GprModel>& gpr_a, const std::optional<detector::GprModel>& gpr_b,
                    const ScanOptions& options) {
    const TwoModeState state = states::make_noisy_tmss(lambda, p, states::default_tmss_cutoff(lambda));
    const int m_max = scan_cutoff(options, state.cutoff().n_max(), a, b);

    PhaseScan scan;
    scan.axis = ScanAxis::sum;
    scan.grid = options.grid.empty() ? uniform_grid() : options.grid;
    scan.results.resize(scan.grid.size());
    parallel_for(scan.grid.size(), options.threads, [&](std::size_t i) {
        scan.results[i] = click_stats_at(state, shifted(a, scan.grid[i], gpr_a), shifted(b, 0.0, gpr_b), m_max);
    });
    return scan;
}

std::vector<double> scan_curve(const PhaseScan& scan, int m, int mp) {
    std::vector<double> out;
    out.reserve(scan.results.size());
    for (const auto& r : scan.results) {
        out.push_back(r.P(m, mp));
    }
    return out;
}

} // namespace qwfh::homodyne
