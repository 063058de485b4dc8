#include "qwfh/bell.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <gsl/gsl_multimin.h>

#include "qwfh/errors.hpp"
#include "qwfh/parallel.hpp"

namespace qwfh::bell {
namespace {

cplx ipow(cplx z, int k) {
    cplx out = 1.0;
    for (int i = 0; i < k; ++i) {
        out *= z;
    }
    return out;
}

// Coefficients over Gamma of (t d^+ + r^* e^+)^n (r d^+ - t e^+)^(K - n),
// rescaled by sqrt(Gamma! (K - Gamma)!) so they multiply normalized kets.
Eigen::VectorXcd side_polynomial(double t, cplx r, int n, int K) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(K + 1);
    const cplx rc = std::conj(r);
    for (int j = 0; j <= n; ++j) {
        const cplx sig = fock::binomial(n, j) * ipow(t, j) * ipow(rc, n - j);
        for (int l = 0; l <= K - n; ++l) {
            c(j + l) += sig * fock::binomial(K - n, l) * ipow(r, l) * ipow(-t, K - n - l);
        }
    }
    for (int g = 0; g <= K; ++g) {
        c(g) *= fock::sqrt_factorial(g) * fock::sqrt_factorial(K - g);
    }
    return c;
}

double global_factor(const BellSettings& s, int a_idx, int b_idx) {
    return std::sqrt(1.0 - std::norm(s.lambda)) *
           std::exp(-0.5 * (std::norm(s.alpha[a_idx]) + std::norm(s.beta[b_idx])));
}

double sigmoid(double u) {
    return 1.0 / (1.0 + std::exp(-u));
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Search coordinates: [u_lambda], then (u_|a1|, phi_a1, u_|a2|, phi_a2,
// u_|b1|, phi_b1, u_|b2|, phi_b2), then [u_t1, u_t2]. The squeezing phase is
// absorbed into the LO phases.
struct Parameterization {
    int M;
    const SearchConfig* cfg;

    int dim() const { return (cfg->fix_lambda_zero ? 0 : 1) + 8 + (cfg->free_beam_splitters ? 2 : 0); }

    BellSettings decode(const double* x) const {
        BellSettings s;
        s.M = M;
        int i = 0;
        s.lambda = cfg->fix_lambda_zero ? 0.0 : cfg->lambda_max * sigmoid(x[i++]);
        for (auto* lo : {&s.alpha[0], &s.alpha[1], &s.beta[0], &s.beta[1]}) {
            const double mag = cfg->lo_max * sigmoid(x[i]);
            *lo = std::polar(mag, x[i + 1]);
            i += 2;
        }
        if (cfg->free_beam_splitters) {
            s.pbs = PbsPair::from_transmittivities(sigmoid(x[i]), sigmoid(x[i + 1]));
        }
        return s;
    }

    int boundary_hits(const double* x) const {
        int hits = 0;
        auto edge = [&](double u) { return std::abs(u) > 9.2; };  // sigmoid within ~1e-4 of 0 or 1
        int i = 0;
        if (!cfg->fix_lambda_zero) {
            hits += edge(x[i++]);
        }
        for (int k = 0; k < 4; ++k, i += 2) {
            hits += edge(x[i]);
        }
        if (cfg->free_beam_splitters) {
            hits += edge(x[i]) + edge(x[i + 1]);
        }
        return hits;
    }
};

double objective(const gsl_vector* v, void* params) {
    const auto* p = static_cast<const Parameterization*>(params);
    try {
        const BellSettings s = p->decode(v->data);
        return -cglmp_I(setting_tables(s), p->M);
    } catch (const Error&) {
        return 1e3;
    }
}

struct RunOutcome {
    std::vector<double> x;
    double value;
    int iterations;
    bool converged;
};

RunOutcome nelder_mead(const Parameterization& param, std::vector<double> x0, double step, const SearchConfig& cfg) {
    const int n = param.dim();
    gsl_multimin_function fn{&objective, static_cast<size_t>(n), const_cast<Parameterization*>(&param)};
    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* steps = gsl_vector_alloc(n);
    for (int i = 0; i < n; ++i) {
        gsl_vector_set(x, i, x0[i]);
        gsl_vector_set(steps, i, step);
    }
    gsl_multimin_fminimizer* mm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(mm, &fn, x, steps);
    int iter = 0;
    bool converged = false;
    while (iter < cfg.max_iterations) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(mm) != GSL_SUCCESS) {
            break;
        }
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(mm), cfg.simplex_tolerance) == GSL_SUCCESS) {
            converged = true;
            break;
        }
    }
    RunOutcome out{std::vector<double>(mm->x->data, mm->x->data + n), -mm->fval, iter, converged};
    gsl_multimin_fminimizer_free(mm);
    gsl_vector_free(steps);
    gsl_vector_free(x);
    return out;
}

Eigen::MatrixXd probabilities_of(const Eigen::MatrixXcd& amp) {
    return amp.cwiseAbs2();
}

// Sector amplitudes without the global factor, divided by the largest
// term weight |k_n|, which is returned in scale.
Eigen::MatrixXcd scaled_sector(const BellSettings& s, int a_idx, int b_idx, int n_a, int n_b, double& scale) {
    s.validate();
    if (n_a < 0 || n_b < 0) {
        throw InvalidArgument("sector photon numbers must be nonnegative");
    }
    const cplx a = s.alpha[a_idx];
    const cplx b = s.beta[b_idx];
    // n TMSS pairs plus (n_a - n) LO photons on A and (n_b - n) on B. Weights
    // are built in logs so that tiny amplitudes do not underflow.
    const int top = std::min(n_a, n_b);
    std::vector<double> logk(top + 1, -INFINITY);
    std::vector<double> phase(top + 1, 0.0);
    double lmax = -INFINITY;
    const auto log_pow = [](double x, int k) { return k == 0 ? 0.0 : k * std::log(x); };
    for (int n = 0; n <= top; ++n) {
        logk[n] = log_pow(std::abs(s.lambda), n) + log_pow(std::abs(a), n_a - n) + log_pow(std::abs(b), n_b - n) -
                  std::lgamma(n + 1.0) - std::lgamma(n_a - n + 1.0) - std::lgamma(n_b - n + 1.0);
        phase[n] = n * std::arg(s.lambda) + (n_a - n) * std::arg(a) + (n_b - n) * std::arg(b);
        lmax = std::max(lmax, logk[n]);
    }
    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(n_a + 1, n_b + 1);
    if (lmax == -INFINITY) {
        scale = 0.0;
        return amp;
    }
    for (int n = 0; n <= top; ++n) {
        if (logk[n] == -INFINITY) {
            continue;
        }
        const cplx k = std::polar(std::exp(logk[n] - lmax), phase[n]);
        amp += k * side_polynomial(s.pbs.t1, s.pbs.r1, n, n_a) *
               side_polynomial(s.pbs.t2, s.pbs.r2, n, n_b).transpose();
    }
    scale = std::exp(lmax);
    return amp;
}

} // namespace

PbsPair PbsPair::from_transmittivities(double t1, double t2) {
    if (!(t1 >= 0.0 && t1 <= 1.0 && t2 >= 0.0 && t2 <= 1.0)) {
        throw InvalidArgument("PBS transmittivities must lie in [0, 1]");
    }
    return PbsPair{t1, cplx(0.0, -std::sqrt(1.0 - t1 * t1)), t2, cplx(0.0, -std::sqrt(1.0 - t2 * t2))};
}

void BellSettings::validate() const {
    if (M < 1) {
        throw InvalidArgument("photon layer M must be at least 1");
    }
    if (!(std::norm(lambda) < 1.0)) {
        throw InvalidSqueezing("|lambda| must be below 1");
    }
    for (auto [t, r] : {std::pair{pbs.t1, pbs.r1}, std::pair{pbs.t2, pbs.r2}}) {
        if (std::abs(t * t + std::norm(r) - 1.0) > 1e-12) {
            throw InvalidArgument("PBS violates |t|^2 + |r|^2 = 1");
        }
    }
}

std::array<cplx, 9> output_amplitudes_m2(const BellSettings& s, int a_idx, int b_idx) {
    if (s.M != 2) {
        throw WrongLayer("closed-form amplitudes exist for M = 2 only, got M = " + std::to_string(s.M));
    }
    s.validate();
    const double t1 = s.pbs.t1;
    const double t2 = s.pbs.t2;
    const cplx r1 = s.pbs.r1;
    const cplx r2 = s.pbs.r2;
    const cplx r1c = std::conj(r1);
    const cplx r2c = std::conj(r2);
    const double q1 = std::norm(r1);
    const double q2 = std::norm(r2);
    const cplx lam = s.lambda;
    const cplx a = s.alpha[a_idx];
    const cplx b = s.beta[b_idx];
    const cplx ab2 = a * a * b * b;
    const cplx lam2 = lam * lam;
    const cplx lab = lam * a * b;

    // Operator coefficients of the output polynomial; sqrt(n!) factors below
    // turn them into normalized-ket amplitudes.
    std::array<cplx, 9> c{
        ab2 / 4.0 * r1 * r1 * r2 * r2 + lam2 / 2.0 * t1 * t1 * t2 * t2 + lab * t1 * t2 * r1 * r2,
        ab2 / 4.0 * t1 * t1 * t2 * t2 + lam2 / 2.0 * r1c * r1c * r2c * r2c + lab * t1 * t2 * r1c * r2c,
        ab2 / 4.0 * r1 * r1 * t2 * t2 + lam2 / 2.0 * t1 * t1 * r2c * r2c - lab * t1 * t2 * r1 * r2c,
        ab2 / 4.0 * t1 * t1 * r2 * r2 + lam2 / 2.0 * r1c * r1c * t2 * t2 - lab * t1 * t2 * r1c * r2,
        ab2 * t1 * t2 * r1 * r2 + 2.0 * lam2 * t1 * t2 * r1c * r2c -
            lab * (t2 * t2 * q1 - q1 * q2 + t1 * t1 * q2 - t1 * t1 * t2 * t2),
        -ab2 / 2.0 * t2 * r1 * r1 * r2 + lam2 * t1 * t1 * t2 * r2c - lab * (t1 * t2 * t2 * r1 - t1 * r1 * q2),
        -ab2 / 2.0 * t1 * r1 * r2 * r2 + lam2 * t1 * t2 * t2 * r1c - lab * (t1 * t1 * t2 * r2 - t2 * q1 * r2),
        -ab2 / 2.0 * t1 * t1 * t2 * r2 + lam2 * t2 * r1c * r1c * r2c - lab * (t1 * r1c * q2 - t1 * t2 * t2 * r1c),
        -ab2 / 2.0 * t1 * t2 * t2 * r1 + lam2 * t1 * r1c * r2c * r2c + lab * (t1 * t1 * t2 * r2c - t2 * q1 * r2c),
    };
    const double g = global_factor(s, a_idx, b_idx);
    for (std::size_t i = 0; i < c.size(); ++i) {
        double ket_norm = 1.0;
        for (int n : kM2Kets[i]) {
            ket_norm *= fock::sqrt_factorial(n);
        }
        c[i] *= g * ket_norm;
    }
    return c;
}

Eigen::MatrixXcd sector_amplitudes(const BellSettings& s, int a_idx, int b_idx, int n_a, int n_b) {
    double scale = 0.0;
    const Eigen::MatrixXcd amp = scaled_sector(s, a_idx, b_idx, n_a, n_b, scale);
    return amp * (scale * global_factor(s, a_idx, b_idx));
}

OutcomeTable layer_probabilities(const BellSettings& s, int a_idx, int b_idx) {
    // The conditional table only depends on lambda / (alpha beta); working
    // with rescaled term weights keeps it out of the denormal range when the
    // sector weight itself underflows.
    double scale = 0.0;
    const Eigen::MatrixXd p = probabilities_of(scaled_sector(s, a_idx, b_idx, s.M, s.M, scale));
    const double total = p.sum();
    if (!(total > 0.0)) {
        throw Undefined("the M-photon sector has zero probability for these settings");
    }
    const double g = scale * global_factor(s, a_idx, b_idx);
    return OutcomeTable{p / total, total * g * g};
}

std::array<OutcomeTable, 4> setting_tables(const BellSettings& s) {
    std::array<OutcomeTable, 4> out;
    for (std::size_t i = 0; i < kSettingPairs.size(); ++i) {
        out[i] = layer_probabilities(s, kSettingPairs[i][0], kSettingPairs[i][1]);
    }
    return out;
}

double outcome_difference_probability(const Eigen::MatrixXd& Q, int eps) {
    const int D = static_cast<int>(Q.rows());
    double p = 0.0;
    for (int g = 0; g < D; ++g) {
        p += Q(g, (((g - eps) % D) + D) % D);
    }
    return p;
}

double cglmp_I(const std::array<Eigen::MatrixXd, 4>& tables, int M) {
    const int D = M + 1;
    for (const auto& t : tables) {
        if (t.rows() != D || t.cols() != D) {
            throw DimensionMismatch("CGLMP tables must be (M + 1) x (M + 1)");
        }
    }
    const auto P = [&](int pair, int eps) { return outcome_difference_probability(tables[pair], eps); };
    double total = 0.0;
    for (int e = 0; e <= (M + 1) / 2 - 1; ++e) {
        const double w = 1.0 - 2.0 * e / M;
        const double plus = P(0, e) + P(1, -e - 1) + P(2, e) + P(3, -e);
        const double minus = P(0, -e - 1) + P(1, e) + P(2, -e - 1) + P(3, e + 1);
        total += w * (plus - minus);
    }
    return total;
}

double cglmp_I(const std::array<OutcomeTable, 4>& tables, int M) {
    return cglmp_I(std::array<Eigen::MatrixXd, 4>{tables[0].Q, tables[1].Q, tables[2].Q, tables[3].Q}, M);
}

Eigen::Matrix3d projector_table(const Eigen::MatrixXd& Q) {
    if (Q.rows() != 3 || Q.cols() != 3) {
        throw DimensionMismatch("projector table needs an M = 2 outcome table");
    }
    Eigen::Matrix3d P;
    for (int k = 0; k < 3; ++k) {
        for (int kp = 0; kp < 3; ++kp) {
            P(k, kp) = Q(2 - k, 2 - kp);
        }
    }
    return P;
}

double i3_from_projectors(const std::array<Eigen::Matrix3d, 4>& P) {
    const auto& a1b1 = P[0];
    const auto& a2b1 = P[1];
    const auto& a2b2 = P[2];
    const auto& a1b2 = P[3];
    const auto same = [](const Eigen::Matrix3d& t) { return t(0, 0) + t(1, 1) + t(2, 2); };
    const auto up = [](const Eigen::Matrix3d& t) { return t(1, 0) + t(2, 1) + t(0, 2); };
    const auto down = [](const Eigen::Matrix3d& t) { return t(0, 1) + t(1, 2) + t(2, 0); };

    const double a1_eq_b1 = same(a1b1);
    const double b1_eq_a2_plus1 = up(a2b1);
    const double a2_eq_b2 = same(a2b2);
    const double b2_eq_a1 = same(a1b2);
    const double a1_eq_b1_minus1 = up(a1b1);
    const double b1_eq_a2 = same(a2b1);
    const double a2_eq_b2_minus1 = up(a2b2);
    const double b2_eq_a1_minus1 = down(a1b2);
    return (a1_eq_b1 + b1_eq_a2_plus1 + a2_eq_b2 + b2_eq_a1) -
           (a1_eq_b1_minus1 + b1_eq_a2 + a2_eq_b2_minus1 + b2_eq_a1_minus1);
}

double quantum_cglmp_bound(int M) {
    // Optimal-state CGLMP maxima for D = 2..8 (D = 2 is Tsirelson's bound).
    static constexpr std::array<double, 7> known{2.0 * M_SQRT2, 2.9149, 2.9727, 3.0157, 3.0497, 3.0776, 3.1013};
    if (M < 1) {
        throw InvalidArgument("photon layer M must be at least 1");
    }
    if (M <= static_cast<int>(known.size())) {
        return known[M - 1];
    }
    return 4.0;  // algebraic maximum of the functional
}

OptimizationResult optimize_IM(int M, const SearchConfig& config) {
    if (M < 1 || M > 8) {
        throw InvalidArgument("optimize_IM supports 1 <= M <= 8");
    }
    if (config.starts < 1) {
        throw InvalidArgument("optimizer needs at least one start");
    }
    const Parameterization param{M, &config};
    const int n = param.dim();

    std::vector<StartTrace> traces(config.starts);
    std::vector<std::vector<double>> finals(config.starts);
    parallel_for(config.starts, config.threads, [&](std::size_t i) {
        std::mt19937_64 rng(splitmix64(config.seed + i));
        std::uniform_real_distribution<double> mag(-3.0, 3.0);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
        std::vector<double> x0(n);
        int j = 0;
        if (!config.fix_lambda_zero) {
            x0[j++] = mag(rng);
        }
        for (int k = 0; k < 4; ++k) {
            x0[j++] = mag(rng);
            x0[j++] = phase(rng);
        }
        if (config.free_beam_splitters) {
            x0[j++] = mag(rng) / 3.0;
            x0[j++] = mag(rng) / 3.0;
        }
        const double initial = cglmp_I(setting_tables(param.decode(x0.data())), M);
        RunOutcome run = nelder_mead(param, x0, 0.5, config);
        // One restart from the end point shakes off simplex collapse.
        RunOutcome polish = nelder_mead(param, run.x, 0.05, config);
        if (polish.value >= run.value) {
            polish.iterations += run.iterations;
            run = std::move(polish);
        }
        traces[i] = StartTrace{static_cast<int>(i), initial, run.value, run.iterations, run.converged,
                               param.boundary_hits(run.x.data())};
        finals[i] = std::move(run.x);
    });

    OptimizationResult out;
    int best = 0;
    int converged = 0;
    for (int i = 0; i < config.starts; ++i) {
        if (traces[i].value > traces[best].value) {
            best = i;
        }
        converged += traces[i].converged;
    }
    out.best = param.decode(finals[best].data());
    out.value = traces[best].value;
    out.best_start = best;
    out.boundary_hits = traces[best].boundary_hits;
    out.converged_fraction = static_cast<double>(converged) / config.starts;
    out.starts = std::move(traces);
    return out;
}

LossDecomposition lossy_layer_check(int M, double eta, const BellSettings& s, int a_idx, int b_idx,
                                    int max_photons) {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw InvalidEfficiency("lossy layer check needs 0 < eta <= 1");
    }
    if (max_photons <= 0) {
        max_photons = M + 12;
    }
    if (max_photons < M + 1) {
        throw CutoffExceeded("lossy layer check needs sectors up to at least M + 1 photons per side");
    }
    BellSettings settings = s;
    settings.M = M;
    const double loss = 1.0 - eta;

    // kernel(g -> G) for one side holding N photons, g of them transmitted:
    // keep G of the g transmitted and M - G of the N - g reflected.
    const auto kernel = [&](int N, int g, int G, bool include_loss) {
        const int kept_r = M - G;
        if (G > g || kept_r > N - g || kept_r < 0) {
            return 0.0;
        }
        const double ways = fock::binomial(g, G) * fock::binomial(N - g, kept_r);
        return include_loss ? ways * std::pow(loss, N - M) : ways;
    };
    const auto feed = [&](int Na, int Nb, bool include_loss) {
        const Eigen::MatrixXd p = probabilities_of(sector_amplitudes(settings, a_idx, b_idx, Na, Nb));
        Eigen::MatrixXd Ka = Eigen::MatrixXd::Zero(M + 1, Na + 1);
        Eigen::MatrixXd Kb = Eigen::MatrixXd::Zero(M + 1, Nb + 1);
        for (int G = 0; G <= M; ++G) {
            for (int g = 0; g <= Na; ++g) {
                Ka(G, g) = kernel(Na, g, G, include_loss);
            }
            for (int g = 0; g <= Nb; ++g) {
                Kb(G, g) = kernel(Nb, g, G, include_loss);
            }
        }
        return Eigen::MatrixXd(Ka * p * Kb.transpose());
    };

    LossDecomposition out;
    out.M = M;
    out.eta = eta;
    out.ideal = probabilities_of(sector_amplitudes(settings, a_idx, b_idx, M, M));
    out.nu = feed(M + 1, M, false) + feed(M, M + 1, false);
    Eigen::MatrixXd scaled = Eigen::MatrixXd::Zero(M + 1, M + 1);
    for (int Na = M; Na <= max_photons; ++Na) {
        for (int Nb = M; Nb <= max_photons; ++Nb) {
            scaled += feed(Na, Nb, true);
        }
    }
    out.lossy = scaled * std::pow(eta, 2 * M);
    out.residual = scaled - (out.ideal + loss * out.nu);
    out.residual_norm = out.residual.cwiseAbs().maxCoeff();
    return out;
}

} // namespace qwfh::bell
