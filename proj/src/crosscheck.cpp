#include "qwfh/crosscheck.hpp"

#include <algorithm>
#include <cmath>

#include "qwfh/detector.hpp"
#include "qwfh/oracle.hpp"
#include "qwfh/parallel.hpp"
#include "qwfh/states.hpp"

namespace qwfh::crosscheck {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

homodyne::WfhChannel random_channel(std::mt19937_64& rng) {
    homodyne::WfhChannel ch;
    ch.lo_magnitude = uniform(rng, 0.0, 1.0);
    ch.lo_phase = uniform(rng, 0.0, 2.0 * M_PI);
    const double r = uniform(rng, 0.4, 0.9);
    ch.bs = BeamSplitter::make(std::sqrt(1.0 - r * r), std::polar(r, uniform(rng, 0.0, 2.0 * M_PI)));
    ch.eta = uniform(rng, 0.05, 1.0);
    ch.bins = detector::kDefaultBins;
    return ch;
}

double max_abs_diff(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return (x - y).cwiseAbs().maxCoeff();
}

} // namespace

WfhTrial random_wfh_trial(std::mt19937_64& rng, int index) {
    WfhTrial t;
    t.index = index;
    t.tmss = index % 2 == 1;
    if (t.tmss) {
        t.lambda = std::polar(uniform(rng, 0.0, 0.5), uniform(rng, 0.0, 2.0 * M_PI));
        t.p = uniform(rng, 0.0, 0.1);
    } else {
        t.w0 = uniform(rng, 0.0, 1.0);
        t.w1 = uniform(rng, 0.0, 1.0) * (1.0 - t.w0);
    }
    t.a = random_channel(rng);
    t.b = random_channel(rng);
    return t;
}

WfhTrialResult run_wfh_trial(const WfhTrial& trial) {
    const TwoModeState state =
        trial.tmss ? states::make_noisy_tmss(trial.lambda, trial.p, states::default_tmss_cutoff(trial.lambda))
                   : states::split_on_balanced_bs(states::make_ssps_input(trial.w0, trial.w1));

    oracle::CircuitSpec spec{state};
    const std::array<const homodyne::WfhChannel*, 2> ch{&trial.a, &trial.b};
    for (int side = 0; side < 2; ++side) {
        spec.element[side] = oracle::asymmetric_mode_matrix(ch[side]->effective_bs());
        spec.lo[side] = oracle::lo_input_for_detected_displacement(ch[side]->detected_displacement(),
                                                                   spec.element[side]);
    }
    spec.keep = oracle::KeepArms::transmitted;
    const int cutoff = oracle::recommended_cutoff(spec);
    const oracle::PhotonStatistics os = oracle::simulate_circuit(spec, cutoff);
    const Eigen::MatrixXd Fo = os.matrix();
    const Eigen::MatrixXd Fa = homodyne::joint_photon_stats(state, trial.a, trial.b, cutoff).F;

    WfhTrialResult r;
    r.index = trial.index;
    r.tmss = trial.tmss;
    r.oracle_cutoff = cutoff;
    r.photon_deviation = max_abs_diff(Fa, Fo);
    r.click_deviation = max_abs_diff(detector::apply_response(Fa, trial.a.eta, trial.b.eta, trial.a.bins).P,
                                     oracle::click_statistics(os, trial.a.eta, trial.b.eta, trial.a.bins));
    return r;
}

bell::BellSettings random_bell_settings(std::mt19937_64& rng) {
    bell::BellSettings s;
    s.M = 2;
    s.lambda = std::polar(uniform(rng, 0.0, 0.9), uniform(rng, 0.0, 2.0 * M_PI));
    for (auto* lo : {&s.alpha[0], &s.alpha[1], &s.beta[0], &s.beta[1]}) {
        *lo = std::polar(uniform(rng, 0.0, 1.5), uniform(rng, 0.0, 2.0 * M_PI));
    }
    s.pbs = bell::PbsPair::from_transmittivities(uniform(rng, 0.2, 0.95), uniform(rng, 0.2, 0.95));
    return s;
}

BellTrialResult run_bell_trial(const bell::BellSettings& s, int index) {
    constexpr int M = 2;
    const auto closed = bell::output_amplitudes_m2(s, 0, 0);
    Eigen::Matrix3d pc = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < closed.size(); ++i) {
        pc(bell::kM2Kets[i][0], bell::kM2Kets[i][1]) += std::norm(closed[i]);
    }
    const Eigen::MatrixXd layer_raw = bell::sector_amplitudes(s, 0, 0, M, M).cwiseAbs2();

    // Photon number is conserved, so pairs above M and a cutoff of 2 M are exact.
    oracle::CircuitSpec spec{states::make_tmss(s.lambda, FockCutoff(M))};
    spec.lo = {s.alpha[0], s.beta[0]};
    spec.element = {oracle::pbs_mode_matrix(s.pbs.t1, s.pbs.r1), oracle::pbs_mode_matrix(s.pbs.t2, s.pbs.r2)};
    spec.keep = oracle::KeepArms::all;
    const oracle::PhotonStatistics os = oracle::simulate_circuit(spec, 2 * M);
    Eigen::Matrix3d po;
    for (int ga = 0; ga <= M; ++ga) {
        for (int gb = 0; gb <= M; ++gb) {
            po(ga, gb) = os.at(ga, M - ga, gb, M - gb);
        }
    }

    BellTrialResult r;
    r.index = index;
    r.closed_vs_layer = max_abs_diff(pc / pc.sum(), layer_raw / layer_raw.sum());
    r.closed_vs_oracle = max_abs_diff(pc / pc.sum(), po / po.sum());
    r.layer_vs_oracle_raw = max_abs_diff(layer_raw, po);
    return r;
}

double Report::max_wfh_deviation() const {
    double m = 0.0;
    for (const auto& t : wfh) {
        m = std::max({m, t.photon_deviation, t.click_deviation});
    }
    return m;
}

double Report::max_bell_deviation() const {
    double m = 0.0;
    for (const auto& t : bell) {
        m = std::max({m, t.closed_vs_layer, t.closed_vs_oracle, t.layer_vs_oracle_raw});
    }
    return m;
}

Report run(int wfh_trials, int bell_trials, std::uint64_t seed, int threads) {
    std::mt19937_64 rng(seed);
    std::vector<WfhTrial> trials;
    for (int i = 0; i < wfh_trials; ++i) {
        trials.push_back(random_wfh_trial(rng, i));
    }
    std::vector<bell::BellSettings> settings;
    for (int i = 0; i < bell_trials; ++i) {
        settings.push_back(random_bell_settings(rng));
    }

    Report rep;
    rep.wfh.resize(trials.size());
    rep.bell.resize(settings.size());
    parallel_for(trials.size(), threads, [&](std::size_t i) { rep.wfh[i] = run_wfh_trial(trials[i]); });
    parallel_for(settings.size(), threads,
                 [&](std::size_t i) { rep.bell[i] = run_bell_trial(settings[i], static_cast<int>(i)); });
    return rep;
}

} // namespace qwfh::crosscheck
