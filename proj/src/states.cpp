#include "qwfh/states.hpp"

#include <cmath>

#include <json.hpp>

#include "qwfh/errors.hpp"

namespace qwfh {
namespace {

Eigen::VectorXcd flatten(const Eigen::MatrixXcd& c) {
    const int d = static_cast<int>(c.rows());
    Eigen::VectorXcd v(d * d);
    for (int n = 0; n < d; ++n) {
        for (int np = 0; np < d; ++np) {
            v(n * d + np) = c(n, np);
        }
    }
    return v;
}

Eigen::MatrixXcd unflatten(const Eigen::VectorXcd& v, int d) {
    Eigen::MatrixXcd c(d, d);
    for (int n = 0; n < d; ++n) {
        for (int np = 0; np < d; ++np) {
            c(n, np) = v(n * d + np);
        }
    }
    return c;
}

} // namespace

TwoModeState TwoModeState::pure(Eigen::MatrixXcd coeffs, double truncation_deficit) {
    if (coeffs.rows() != coeffs.cols() || coeffs.rows() < 2) {
        throw DimensionMismatch("pure two-mode coefficients must be square with dimension >= 2");
    }
    TwoModeState s;
    s.kind_ = Kind::pure;
    s.dim_ = static_cast<int>(coeffs.rows());
    s.deficit_ = truncation_deficit;
    s.coeffs_ = std::move(coeffs);
    return s;
}

TwoModeState TwoModeState::mixed(Eigen::MatrixXcd density, int dim, double truncation_deficit) {
    if (dim < 2 || density.rows() != dim * dim || density.cols() != dim * dim) {
        throw DimensionMismatch("density matrix must be (dim^2 x dim^2) with dim >= 2");
    }
    if ((density - density.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InvalidArgument("density matrix is not Hermitian");
    }
    TwoModeState s;
    s.kind_ = Kind::mixed;
    s.dim_ = dim;
    s.deficit_ = truncation_deficit;
    s.density_ = std::move(density);
    return s;
}

const Eigen::MatrixXcd& TwoModeState::coeffs() const {
    if (kind_ != Kind::pure) {
        throw InvalidArgument("coefficients requested from a mixed state");
    }
    return coeffs_;
}

cplx TwoModeState::rho(int n, int np, int m, int mp) const {
    if (kind_ == Kind::pure) {
        return coeffs_(n, np) * std::conj(coeffs_(m, mp));
    }
    return density_(n * dim_ + np, m * dim_ + mp);
}

double TwoModeState::trace() const {
    if (kind_ == Kind::pure) {
        return coeffs_.squaredNorm();
    }
    return density_.trace().real();
}

Eigen::MatrixXd TwoModeState::populations() const {
    Eigen::MatrixXd p(dim_, dim_);
    for (int n = 0; n < dim_; ++n) {
        for (int np = 0; np < dim_; ++np) {
            p(n, np) = rho(n, np, n, np).real();
        }
    }
    return p;
}

Eigen::VectorXd TwoModeState::marginal_a() const {
    return populations().rowwise().sum();
}

Eigen::VectorXd TwoModeState::marginal_b() const {
    return populations().colwise().sum().transpose();
}

std::vector<PureComponent> TwoModeState::pure_components(double drop_below) const {
    if (kind_ == Kind::pure) {
        return {PureComponent{1.0, coeffs_}};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(density_);
    std::vector<PureComponent> out;
    // Largest eigenvalues first so summation order is stable across builds.
    for (Eigen::Index i = eig.eigenvalues().size() - 1; i >= 0; --i) {
        const double w = eig.eigenvalues()(i);
        if (w > drop_below) {
            out.push_back({w, unflatten(eig.eigenvectors().col(i), dim_)});
        }
    }
    return out;
}

namespace states {

SingleModeMixture make_ssps_input(double w0, double w1) {
    if (!(w0 >= 0.0) || !(w1 >= 0.0) || w0 + w1 > 1.0 + 1e-15) {
        throw InvalidWeights("SSPS weights need w0, w1 >= 0 and w0 + w1 <= 1");
    }
    return SingleModeMixture{{w0, w1, std::max(0.0, 1.0 - w0 - w1)}};
}

Eigen::MatrixXcd split_fock_layer(int n, int dim) {
    if (n >= dim) {
        throw CutoffExceeded("Fock layer does not fit the requested dimension");
    }
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dim, dim);
    // (a^+)^n / sqrt(n!) -> sum_k C(n,k) t^(n-k) r^k |n-k, k> sqrt((n-k)! k! / n!)
    const double half_pow = std::pow(0.5, 0.5 * n);
    for (int k = 0; k <= n; ++k) {
        c(n - k, k) = std::sqrt(fock::binomial(n, k)) * half_pow;
    }
    return c;
}

TwoModeState split_on_balanced_bs(const SingleModeMixture& input) {
    double total = 0.0;
    for (double w : input.weights) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw InvalidWeights("mixture weights must lie in [0, 1]");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidWeights("mixture weights must sum to 1");
    }
    const int dim = std::max(2, input.max_photons() + 1);
    Eigen::MatrixXcd density = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
    for (int n = 0; n <= input.max_photons(); ++n) {
        if (input.weights[n] == 0.0) {
            continue;
        }
        const Eigen::VectorXcd v = flatten(split_fock_layer(n, dim));
        density += input.weights[n] * v * v.adjoint();
    }
    return TwoModeState::mixed(std::move(density), dim);
}

FockCutoff default_tmss_cutoff(cplx lambda) {
    const double l2 = std::norm(lambda);
    if (l2 >= 1.0) {
        throw InvalidSqueezing("|lambda| must be below 1");
    }
    const int heuristic = static_cast<int>(std::ceil(4.0 * l2 / (1.0 - l2))) + 8;
    return FockCutoff(std::max(8, heuristic));
}

TwoModeState make_tmss(cplx lambda, FockCutoff cutoff) {
    const double l2 = std::norm(lambda);
    if (!(l2 < 1.0)) {
        throw InvalidSqueezing("|lambda| must be below 1");
    }
    const int d = cutoff.dim();
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(d, d);
    const double norm = std::sqrt(1.0 - l2);
    cplx power = 1.0;
    for (int n = 0; n < d; ++n) {
        c(n, n) = norm * power;
        power *= lambda;
    }
    return TwoModeState::pure(std::move(c), std::pow(l2, d));
}

TwoModeState make_noisy_tmss(cplx lambda, double p, FockCutoff cutoff) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidWeights("noise weight p must lie in [0, 1]");
    }
    const TwoModeState tmss = make_tmss(lambda, cutoff);
    const int d = cutoff.dim();
    const Eigen::VectorXcd v = flatten(tmss.coeffs());
    Eigen::MatrixXcd density = (1.0 - p) * v * v.adjoint();
    // |0>_A |1>_B
    density(0 * d + 1, 0 * d + 1) += p;
    return TwoModeState::mixed(std::move(density), d, (1.0 - p) * tmss.truncation_deficit());
}

double g2_of_distribution(const Eigen::VectorXd& f) {
    double mean = 0.0;
    double second = 0.0;
    for (Eigen::Index n = 0; n < f.size(); ++n) {
        if (f(n) < -1e-12) {
            throw InvalidArgument("photon-number distribution has negative entries");
        }
        mean += n * f(n);
        second += n * (n - 1.0) * f(n);
    }
    if (mean <= 0.0) {
        throw Undefined("g2 is undefined for a distribution with zero mean photon number");
    }
    return second / (mean * mean);
}

std::string to_json(const TwoModeState& state) {
    nlohmann::json j;
    j["kind"] = state.is_pure() ? "pure" : "mixed";
    j["cutoff"] = state.cutoff().n_max();
    j["truncation_deficit"] = state.truncation_deficit();
    auto entries = nlohmann::json::array();
    const int d = state.dim();
    if (state.is_pure()) {
        for (int n = 0; n < d; ++n) {
            for (int np = 0; np < d; ++np) {
                const cplx c = state.coeffs()(n, np);
                if (c != 0.0) {
                    entries.push_back({{n, np}, c.real(), c.imag()});
                }
            }
        }
    } else {
        for (int row = 0; row < d * d; ++row) {
            for (int col = 0; col < d * d; ++col) {
                const cplx c = state.density()(row, col);
                if (c != 0.0) {
                    entries.push_back({{row / d, row % d, col / d, col % d}, c.real(), c.imag()});
                }
            }
        }
    }
    j["entries"] = std::move(entries);
    return j.dump();
}

TwoModeState from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("state JSON does not parse: ") + e.what());
    }
    try {
        const std::string kind = j.at("kind");
        const int d = FockCutoff(j.at("cutoff").get<int>()).dim();
        const double deficit = j.value("truncation_deficit", 0.0);
        if (kind == "pure") {
            Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(d, d);
            for (const auto& e : j.at("entries")) {
                const auto idx = e.at(0).get<std::vector<int>>();
                if (idx.size() != 2 || idx[0] < 0 || idx[1] < 0 || idx[0] >= d || idx[1] >= d) {
                    throw ConfigError("pure state entry has invalid indices");
                }
                c(idx[0], idx[1]) = cplx(e.at(1).get<double>(), e.at(2).get<double>());
            }
            return TwoModeState::pure(std::move(c), deficit);
        }
        if (kind == "mixed") {
            Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d * d, d * d);
            for (const auto& e : j.at("entries")) {
                const auto idx = e.at(0).get<std::vector<int>>();
                if (idx.size() != 4) {
                    throw ConfigError("mixed state entry needs four indices");
                }
                for (int i : idx) {
                    if (i < 0 || i >= d) {
                        throw ConfigError("mixed state entry index out of range");
                    }
                }
                rho(idx[0] * d + idx[1], idx[2] * d + idx[3]) = cplx(e.at(1).get<double>(), e.at(2).get<double>());
            }
            return TwoModeState::mixed(std::move(rho), d, deficit);
        }
        throw ConfigError("state kind must be 'pure' or 'mixed'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed state JSON: ") + e.what());
    }
}

} // namespace states
} // namespace qwfh
