#include "qwfh/detector.hpp"

#include <cmath>
#include <string>

#include "qwfh/errors.hpp"
#include "qwfh/fock.hpp"

namespace qwfh::detector {
namespace {

void check_eta(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw InvalidEfficiency("detector efficiency must lie in [0, 1], got " + std::to_string(eta));
    }
}

Eigen::MatrixXd response(double eta, int bins, int n_max) {
    return binning_matrix(bins, n_max).C * loss_matrix(eta, n_max).L;
}

// Normal-equations pseudo-inverse of the response restricted to n <= support.
Eigen::MatrixXd truncated_pinv(double eta, int bins, int support, double max_condition) {
    if (support < 0 || support > bins) {
        throw InvalidArgument("inversion support must lie in [0, bins]");
    }
    const Eigen::MatrixXd R = response(eta, bins, std::max(support, 1)).leftCols(support + 1);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    const auto& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    const double cond = smallest > 0.0 ? sv(0) / smallest : INFINITY;
    if (!(cond <= max_condition)) {
        throw IllConditioned("truncated detector response has condition number " + std::to_string(cond) +
                             " above " + std::to_string(max_condition));
    }
    const Eigen::MatrixXd normal = R.transpose() * R;
    return normal.ldlt().solve(R.transpose());
}

} // namespace

void GprModel::validate() const {
    if (!(v >= 0.0 && v < 1.0)) {
        throw InvalidArgument("GPR modulation depth must satisfy 0 <= v < 1");
    }
    if (!(r0 >= 0.0) || r0 * r0 * (1.0 + v) > 1.0) {
        throw InvalidArgument("GPR reflectivity would exceed 1 over the modulation");
    }
}

LossMatrix loss_matrix(double eta, int n_max) {
    check_eta(eta);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        for (int m = 0; m <= n; ++m) {
            L(m, n) = fock::binomial(n, m) * std::pow(eta, m) * std::pow(1.0 - eta, n - m);
        }
    }
    return {eta, std::move(L)};
}

BinningMatrix binning_matrix(int bins, int n_max) {
    if (bins < 1) {
        throw InvalidArgument("detector needs at least one bin");
    }
    // Occupancy recurrence: the (n+1)-th photon lands in an occupied slot with
    // probability k / bins, otherwise it opens a new one.
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(bins + 1, n_max + 1);
    C(0, 0) = 1.0;
    const double b = bins;
    for (int n = 0; n < n_max; ++n) {
        for (int k = 0; k <= bins; ++k) {
            double v = C(k, n) * (k / b);
            if (k > 0) {
                v += C(k - 1, n) * ((b - k + 1) / b);
            }
            C(k, n + 1) = v;
        }
    }
    return {bins, std::move(C)};
}

JointClickMatrix apply_response(const Eigen::MatrixXd& F, double eta_a, double eta_b, int bins) {
    if (F.rows() < 1 || F.cols() < 1) {
        throw DimensionMismatch("photon statistics matrix is empty");
    }
    const Eigen::MatrixXd Ra = response(eta_a, bins, static_cast<int>(F.rows()) - 1);
    const Eigen::MatrixXd Rb = response(eta_b, bins, static_cast<int>(F.cols()) - 1);
    JointClickMatrix out;
    out.P = Ra * F * Rb.transpose();
    out.truncation_deficit = 1.0 - F.sum();
    return out;
}

Eigen::VectorXd apply_response(const Eigen::VectorXd& f, double eta, int bins) {
    if (f.size() < 1) {
        throw DimensionMismatch("photon statistics vector is empty");
    }
    return response(eta, bins, static_cast<int>(f.size()) - 1) * f;
}

Eigen::MatrixXd invert_response(const Eigen::MatrixXd& P, double eta_a, double eta_b, int bins, int support,
                                double max_condition) {
    if (P.rows() != bins + 1 || P.cols() != bins + 1) {
        throw DimensionMismatch("click matrix must be (bins + 1) x (bins + 1)");
    }
    const Eigen::MatrixXd Ga = truncated_pinv(eta_a, bins, support, max_condition);
    const Eigen::MatrixXd Gb = truncated_pinv(eta_b, bins, support, max_condition);
    return Ga * P * Gb.transpose();
}

Eigen::VectorXd invert_response(const Eigen::VectorXd& p, double eta, int bins, int support, double max_condition) {
    if (p.size() != bins + 1) {
        throw DimensionMismatch("click vector must have bins + 1 entries");
    }
    return truncated_pinv(eta, bins, support, max_condition) * p;
}

SourceWeights estimate_source_weights(const Eigen::MatrixXd& P, double eta_a, double eta_b, int bins, int support) {
    if (support < 1) {
        throw InvalidArgument("weight estimation needs support >= 1");
    }
    const Eigen::MatrixXd F = invert_response(P, eta_a, eta_b, bins, support);
    return {F(0, 0), F(1, 0) + F(0, 1)};
}

double gpr_reflectivity(double theta, const GprModel& model) {
    model.validate();
    return model.r0 * std::sqrt(1.0 + model.v * std::cos(4.0 * theta + model.theta0));
}

double gpr_transmittivity(double theta, const GprModel& model) {
    const double r = gpr_reflectivity(theta, model);
    return std::sqrt(1.0 - r * r);
}

} // namespace qwfh::detector
