#include "qwfh/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qwfh/detector.hpp"
#include "qwfh/errors.hpp"

namespace qwfh::oracle {
namespace {

// Principal logarithm of a unitary 2x2 matrix. A complex Schur form of a
// normal matrix is diagonal, so Z diag(log lambda) Z^+ is exact up to roundoff.
Eigen::Matrix2cd unitary_log(const Eigen::Matrix2cd& U) {
    Eigen::ComplexSchur<Eigen::Matrix2cd> schur(U);
    const Eigen::Matrix2cd& T = schur.matrixT();
    const Eigen::Matrix2cd& Z = schur.matrixU();
    if (std::abs(T(0, 1)) > 1e-10) {
        throw InvalidArgument("mode matrix is not unitary");
    }
    Eigen::Matrix2cd L = Eigen::Matrix2cd::Zero();
    for (int i = 0; i < 2; ++i) {
        const cplx lam = T(i, i);
        if (std::abs(std::abs(lam) - 1.0) > 1e-10) {
            throw InvalidArgument("mode matrix is not unitary");
        }
        L(i, i) = cplx(0.0, std::arg(lam));
    }
    return Z * L * Z.adjoint();
}

void check_unitary(const ModeMatrix& S) {
    if (!(S * S.adjoint()).isApprox(ModeMatrix::Identity(), 1e-12)) {
        throw InvalidArgument("mode matrix is not unitary");
    }
}

std::size_t tensor_bytes(int dim, KeepArms keep) {
    const std::size_t d2 = static_cast<std::size_t>(dim) * dim;
    const std::size_t d4 = d2 * d2;
    // two element unitaries, the output amplitudes and the probability table
    std::size_t bytes = 2 * d4 * sizeof(cplx) + d4 * sizeof(cplx) + d4 * sizeof(double);
    if (keep == KeepArms::transmitted) {
        bytes += d2 * sizeof(double);
    }
    return bytes;
}

// Output amplitudes of one side: column n is U (|n>_signal |lo>_LO).
Eigen::MatrixXcd side_columns(const Eigen::MatrixXcd& U, cplx lo, int signal_dim, int cutoff) {
    const int D = cutoff + 1;
    const Eigen::VectorXcd coh = coherent_column(lo, cutoff);
    Eigen::MatrixXcd in = Eigen::MatrixXcd::Zero(D * D, signal_dim);
    for (int n = 0; n < signal_dim; ++n) {
        in.block(n * D, n, D, 1) = coh;
    }
    return U * in;
}

} // namespace

ModeMatrix asymmetric_mode_matrix(const BeamSplitter& bs) {
    ModeMatrix S;
    S << bs.t, bs.r, -std::conj(bs.r), bs.t;
    return S;
}

ModeMatrix pbs_mode_matrix(double t, cplx r) {
    ModeMatrix S;
    S << t, std::conj(r), r, -t;
    return S;
}

Eigen::MatrixXcd mode_unitary(const ModeMatrix& S, int cutoff) {
    if (cutoff < 0) {
        throw InvalidArgument("cutoff must be nonnegative");
    }
    check_unitary(S);
    // With A = sum_kl G(k, l) a_k^+ a_l, exp(A) a_i^+ exp(-A) = sum_j exp(G)(j, i) a_j^+,
    // so exp(G) = S^T. A is anti-Hermitian and H = i A is the Hermitian generator.
    const Eigen::Matrix2cd G = unitary_log(S.transpose());
    const int D = cutoff + 1;
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(D * D, D * D);
    for (int N = 0; N <= cutoff; ++N) {
        // basis |k, N - k>, k = 0..N
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N + 1, N + 1);
        for (int k = 0; k <= N; ++k) {
            const int l = N - k;
            H(k, k) += G(0, 0) * double(k) + G(1, 1) * double(l);
            if (l > 0) {
                H(k + 1, k) += G(0, 1) * std::sqrt(double(k + 1) * l);
            }
            if (k > 0) {
                H(k - 1, k) += G(1, 0) * std::sqrt(double(k) * (l + 1));
            }
        }
        H *= cplx(0.0, 1.0);
        H = 0.5 * (H + H.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
        const Eigen::VectorXcd phases =
            es.eigenvalues().unaryExpr([](double e) { return std::exp(cplx(0.0, -e)); });
        const Eigen::MatrixXcd block =
            es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
        for (int k = 0; k <= N; ++k) {
            for (int kp = 0; kp <= N; ++kp) {
                U(k * D + (N - k), kp * D + (N - kp)) = block(k, kp);
            }
        }
    }
    return U;
}

Eigen::MatrixXcd bs_unitary(double t, cplx r, int cutoff) {
    return mode_unitary(asymmetric_mode_matrix(BeamSplitter{t, r}), cutoff);
}

Eigen::VectorXcd coherent_column(cplx alpha, int cutoff) {
    Eigen::VectorXcd c(cutoff + 1);
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n <= cutoff; ++n) {
        c(n) = c(n - 1) * alpha / std::sqrt(double(n));
    }
    return c;
}

cplx lo_input_for_detected_displacement(cplx detected, const ModeMatrix& S) {
    if (std::abs(S(1, 0)) < 1e-12) {
        throw InvalidArgument("the LO port does not reach the detected output");
    }
    return detected / S(1, 0);
}

double PhotonStatistics::at(int d1, int e1, int d2, int e2) const {
    const std::size_t D = dim;
    return probs[((d1 * D + e1) * D + d2) * D + e2];
}

Eigen::MatrixXd PhotonStatistics::matrix() const {
    if (arms != 2) {
        throw WrongLayer("matrix() needs transmitted-arm statistics");
    }
    return Eigen::Map<const Eigen::MatrixXd>(probs.data(), dim, dim).transpose();
}

int recommended_cutoff(const CircuitSpec& spec) {
    const double g = std::max(std::abs(spec.lo[0]), std::abs(spec.lo[1]));
    return spec.input.dim() - 1 + static_cast<int>(std::ceil(g * g + 8.0 * g + 10.0));
}

PhotonStatistics simulate_circuit(const CircuitSpec& spec, int cutoff, std::size_t memory_budget) {
    const int D = cutoff + 1;
    const int sd = spec.input.dim();
    if (cutoff < sd - 1) {
        throw CutoffExceeded("oracle cutoff below the input state's photon range");
    }
    const std::size_t need = tensor_bytes(D, spec.keep);
    if (need > memory_budget) {
        throw MemoryBudgetExceeded("oracle tensor needs " + std::to_string(need) + " bytes, budget is " +
                                   std::to_string(memory_budget));
    }

    Eigen::MatrixXcd ua = mode_unitary(spec.element[0], cutoff);
    const Eigen::MatrixXcd colA = side_columns(ua, spec.lo[0], sd, cutoff);
    ua.resize(0, 0);
    Eigen::MatrixXcd ub = mode_unitary(spec.element[1], cutoff);
    const Eigen::MatrixXcd colB = side_columns(ub, spec.lo[1], sd, cutoff);
    ub.resize(0, 0);

    // Pure components from an eigendecomposition of the full density matrix.
    std::vector<std::pair<double, Eigen::MatrixXcd>> comps;
    if (spec.input.is_pure()) {
        comps.emplace_back(1.0, spec.input.coeffs());
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(spec.input.density());
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            const double w = es.eigenvalues()(i);
            if (w <= 1e-15) {
                continue;
            }
            Eigen::MatrixXcd c(sd, sd);
            for (int n = 0; n < sd; ++n) {
                for (int np = 0; np < sd; ++np) {
                    c(n, np) = es.eigenvectors()(n * sd + np, i);
                }
            }
            comps.emplace_back(w, std::move(c));
        }
    }

    // rows: (A_out1, A_out2), cols: (B_out1, B_out2)
    Eigen::MatrixXd prob = Eigen::MatrixXd::Zero(D * D, D * D);
    for (const auto& [w, c] : comps) {
        const Eigen::MatrixXcd amp = colA * c * colB.transpose();
        prob += w * amp.cwiseAbs2();
    }

    PhotonStatistics out;
    out.dim = D;
    if (spec.keep == KeepArms::all) {
        out.arms = 4;
        out.probs.resize(static_cast<std::size_t>(D) * D * D * D);
        for (int i = 0; i < D * D; ++i) {
            for (int j = 0; j < D * D; ++j) {
                out.probs[static_cast<std::size_t>(i) * D * D + j] = prob(i, j);
            }
        }
    } else {
        out.arms = 2;
        out.probs.assign(static_cast<std::size_t>(D) * D, 0.0);
        for (int d1 = 0; d1 < D; ++d1) {
            for (int e1 = 0; e1 < D; ++e1) {
                for (int d2 = 0; d2 < D; ++d2) {
                    double s = 0.0;
                    for (int e2 = 0; e2 < D; ++e2) {
                        s += prob(d1 * D + e1, d2 * D + e2);
                    }
                    out.probs[static_cast<std::size_t>(d1) * D + d2] += s;
                }
            }
        }
    }
    return out;
}

Eigen::MatrixXd click_statistics(const PhotonStatistics& stats, double eta_a, double eta_b, int bins) {
    return detector::apply_response(stats.matrix(), eta_a, eta_b, bins).P;
}

} // namespace qwfh::oracle
