#include "doctest.h"

#include <unsupported/Eigen/MatrixFunctions>

#include "qwfh/errors.hpp"
#include "qwfh/fock.hpp"

using namespace qwfh;

namespace {

// <m | D(alpha) | n> from exp(alpha a^+ - alpha^* a) on a large truncated space.
Eigen::MatrixXcd displacement_by_expm(cplx alpha, int cutoff) {
    const int d = cutoff + 1;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 1; n < d; ++n) {
        a(n - 1, n) = std::sqrt(double(n));
    }
    const Eigen::MatrixXcd gen = alpha * a.adjoint() - std::conj(alpha) * a;
    return gen.exp();
}

} // namespace

TEST_CASE("factorials and binomials") {
    CHECK(fock::factorial(0) == 1.0);
    CHECK(fock::factorial(10) == 3628800.0);
    CHECK(fock::binomial(10, 3) == 120.0);
    CHECK(fock::binomial(4, 5) == 0.0);
    CHECK(fock::sqrt_factorial(6) == doctest::Approx(std::sqrt(720.0)).epsilon(1e-15));
    CHECK_THROWS_AS(fock::factorial(171), CutoffExceeded);
}

TEST_CASE("displaced Fock overlaps against matrix exponential") {
    for (cplx alpha : {cplx(0.51, 0.0), cplx(-0.3, 0.8), cplx(0.0, -1.1)}) {
        const Eigen::MatrixXcd D = displacement_by_expm(alpha, 60);
        const Eigen::MatrixXcd O = fock::displaced_fock_overlaps(alpha, 8, 5);
        for (int m = 0; m <= 8; ++m) {
            for (int n = 0; n <= 5; ++n) {
                const cplx want = fock::sqrt_factorial(n) * D(m, n);
                CHECK(std::abs(O(m, n) - want) < 1e-12);
            }
        }
    }
}

TEST_CASE("displaced Fock states have norm n!") {
    const cplx alpha(0.4, -0.2);
    const Eigen::MatrixXcd O = fock::displaced_fock_overlaps(alpha, 60, 4);
    for (int n = 0; n <= 4; ++n) {
        CHECK(O.col(n).squaredNorm() == doctest::Approx(fock::factorial(n)).epsilon(1e-12));
    }
}

TEST_CASE("LO displacement split") {
    const auto [out1, out2] = fock::bs_split_displacement(0.585, BeamSplitter::balanced());
    CHECK(std::abs(out1 - cplx(-0.585 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::abs(out2 - cplx(0.585 / std::sqrt(2.0))) < 1e-15);
}

TEST_CASE("beam splitter validation") {
    CHECK_THROWS_AS(BeamSplitter::make(0.9, 0.9), InvalidArgument);
    CHECK_THROWS_AS(FockCutoff(0), InvalidArgument);
    CHECK(BeamSplitter::from_transmittivity(0.6).r_abs() == doctest::Approx(0.8));
}
