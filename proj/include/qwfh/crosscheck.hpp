#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qwfh/bell.hpp"
#include "qwfh/homodyne.hpp"

// Cross-path agreement between the analytic pipelines and the dense oracle.
namespace qwfh::crosscheck {

struct WfhTrial {
    int index = 0;
    bool tmss = false;
    double w0 = 1.0, w1 = 0.0;  // SSPS weights
    cplx lambda = 0.0;          // TMSS
    double p = 0.0;
    homodyne::WfhChannel a, b;
};

/// |alpha| <= 1, eta in [0.05, 1], |r| in [0.4, 0.9] with a random phase,
/// random LO phases. Even indices are SSPS inputs, odd ones noisy TMSS.
WfhTrial random_wfh_trial(std::mt19937_64& rng, int index);

struct WfhTrialResult {
    int index = 0;
    bool tmss = false;
    int oracle_cutoff = 0;
    double photon_deviation = 0.0;  // max |F_analytic - F_oracle|
    double click_deviation = 0.0;   // max |P_analytic - P_oracle|
};

WfhTrialResult run_wfh_trial(const WfhTrial& trial);

struct BellTrialResult {
    int index = 0;
    /// closed form vs sector_amplitudes, normalized tables
    double closed_vs_layer = 0.0;
    /// closed form vs four-arm oracle, normalized tables
    double closed_vs_oracle = 0.0;
    /// unconditioned sector probabilities, sector_amplitudes vs oracle
    double layer_vs_oracle_raw = 0.0;
};

bell::BellSettings random_bell_settings(std::mt19937_64& rng);

/// Compares the M = 2 tables for setting pair (0, 0).
BellTrialResult run_bell_trial(const bell::BellSettings& s, int index);

struct Report {
    std::vector<WfhTrialResult> wfh;
    std::vector<BellTrialResult> bell;
    double max_wfh_deviation() const;
    double max_bell_deviation() const;
};

Report run(int wfh_trials, int bell_trials, std::uint64_t seed, int threads = 1);

} // namespace qwfh::crosscheck
