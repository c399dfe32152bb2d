#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "zdistill/linalg.hpp"

using namespace zdistill;

TEST_CASE("hermitian operator rejects non-Hermitian input") {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(HermitianOperator(m), InvariantViolation);
    m(1, 0) = 1.0;
    CHECK_NOTHROW(HermitianOperator(m));
    CHECK_THROWS_AS(HermitianOperator(ComplexMatrix::Zero(2, 3)), DimensionMismatch);
}

TEST_CASE("matexp of zero and of a two-level diagonal") {
    CHECK(max_abs(hermitian_matexp(HermitianOperator::zero(3), 2.0) - ComplexMatrix::Identity(3, 3)) < 1e-15);

    ComplexMatrix h = ComplexMatrix::Zero(2, 2);
    h(1, 1) = 2.0;
    const ComplexMatrix u = hermitian_matexp(HermitianOperator(h), std::numbers::pi / 2);
    CHECK(std::abs(u(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(u(1, 1) + 1.0) < 1e-15);
    CHECK(std::abs(u(0, 1)) < 1e-15);
}

TEST_CASE("matexp agrees with the power series and is unitary") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const ComplexMatrix h = testutil::random_hermitian(rng, 8, 0.5);
        const HermitianOperator op(h);
        const double t = 0.3 + 0.4 * trial;
        const ComplexMatrix u = hermitian_matexp(op, t);
        CHECK(max_abs(u - testutil::taylor_expm(h, t)) < 1e-10);
        CHECK(max_abs(u * u.adjoint() - ComplexMatrix::Identity(8, 8)) < 1e-13);
        CHECK(max_abs(u * hermitian_matexp(op, -t) - ComplexMatrix::Identity(8, 8)) < 1e-13);
        CHECK(max_abs(hermitian_matexp(op, t + 0.7) - hermitian_matexp(op, 0.7) * u) < 1e-12);
    }
    CHECK_THROWS_AS(hermitian_matexp(HermitianOperator::zero(2), std::nan("")), PreconditionError);
}

TEST_CASE("density matrix invariants") {
    CHECK_THROWS_AS(DensityMatrix(ComplexMatrix::Identity(2, 2)), InvariantViolation);
    ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix(neg), InvariantViolation);
    CHECK_THROWS_AS(DensityMatrix::diagonal({1.0, -0.1}), InvariantViolation);
    const auto rho = DensityMatrix::diagonal({1.0, 3.0});
    CHECK(rho.matrix()(1, 1).real() == Catch::Approx(0.75));
    CHECK(rho.purity() == Catch::Approx(0.625));
    CHECK(DensityMatrix::maximally_mixed(4).purity() == Catch::Approx(0.25));
    CHECK_THROWS_AS(PureState(ComplexVector::Zero(3)), InvariantViolation);
}

TEST_CASE("spectral decomposition of a diagonal matrix") {
    ComplexMatrix v = ComplexMatrix::Zero(2, 2);
    v(0, 0) = 0.5;
    v(1, 1) = Complex(0.0, 0.2);
    const auto sd = spectral_decompose(v);
    REQUIRE(sd.size() == 2);
    CHECK(std::abs(sd.eigenvalues[0] - 0.5) < 1e-15);
    CHECK(std::abs(sd.eigenvalues[1] - Complex(0.0, 0.2)) < 1e-15);
    CHECK(std::abs(std::abs(sd.u(0)(0)) - 1.0) < 1e-15);
    CHECK(std::abs(std::abs(sd.u(1)(1)) - 1.0) < 1e-15);
    CHECK(sd.dominant_gap == Catch::Approx(0.4));
}

TEST_CASE("equal magnitudes are ordered by real part then imaginary part") {
    ComplexMatrix v = ComplexMatrix::Zero(4, 4);
    v(0, 0) = -0.5;
    v(1, 1) = 0.5;
    v(2, 2) = Complex(0.0, 0.5);
    v(3, 3) = Complex(0.0, -0.5);
    const auto sd = spectral_decompose(v);
    CHECK(std::abs(sd.eigenvalues[0] - 0.5) < 1e-15);
    CHECK(std::abs(sd.eigenvalues[1] - Complex(0.0, 0.5)) < 1e-15);
    CHECK(std::abs(sd.eigenvalues[2] - Complex(0.0, -0.5)) < 1e-15);
    CHECK(std::abs(sd.eigenvalues[3] + 0.5) < 1e-15);
}

TEST_CASE("defective matrices are rejected, degenerate diagonalizable ones are not") {
    ComplexMatrix jordan = ComplexMatrix::Zero(2, 2);
    jordan(0, 0) = 0.5;
    jordan(1, 1) = 0.5;
    jordan(0, 1) = 1.0;
    CHECK_THROWS_AS(spectral_decompose(jordan), NonDiagonalizable);

    CHECK_NOTHROW(spectral_decompose(ComplexMatrix::Identity(3, 3)));
    ComplexMatrix d = ComplexMatrix::Zero(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = 1.0;
    d(2, 2) = 0.3;
    const auto sd = spectral_decompose(d);
    CHECK(max_abs(sd.reconstruct() - d) < 1e-12);
}

TEST_CASE("biorthogonal decomposition of random matrices") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const ComplexMatrix v = testutil::random_matrix(rng, 6, 0.3);
        const auto sd = spectral_decompose(v);
        CHECK(max_abs(sd.left * sd.right - ComplexMatrix::Identity(6, 6)) < 1e-9);
        CHECK(max_abs(sd.reconstruct() - v) < 1e-10);
        for (Index k = 0; k < 6; ++k) {
            CHECK(std::abs(sd.u(k).norm() - 1.0) < 1e-12);
            CHECK((v * sd.u(k) - sd.eigenvalues[k] * sd.u(k)).norm() < 1e-10);
            if (k > 0) CHECK(std::abs(sd.eigenvalues[k]) <= std::abs(sd.eigenvalues[k - 1]) + 1e-15);
        }
        // eigenvalue multiset survives a rebuild
        const auto again = eigenvalues(sd.reconstruct());
        for (std::size_t k = 0; k < again.size(); ++k) CHECK(std::abs(again[k] - sd.eigenvalues[k]) < 1e-8);
        CHECK(spectral_radius(v) == Catch::Approx(std::abs(sd.eigenvalues[0])));
    }
}

TEST_CASE("power_apply") {
    std::mt19937_64 rng(3);
    const auto rho = testutil::random_density(rng, 5);
    const auto zero = power_apply(testutil::random_matrix(rng, 5), rho, 0);
    CHECK(max_abs(zero.matrix - rho.matrix()) == 0.0);
    CHECK(zero.trace == 1.0);

    const ComplexMatrix u = hermitian_matexp(HermitianOperator(testutil::random_hermitian(rng, 5)), 1.0);
    CHECK(power_apply(u, rho, 5).trace == Catch::Approx(1.0).epsilon(1e-13));

    const ComplexMatrix v = testutil::random_matrix(rng, 5, 0.2);
    const auto sd = spectral_decompose(v);
    const ComplexMatrix vn = sd.power(12);
    const auto direct = power_apply(v, rho, 12);
    CHECK(max_abs(direct.matrix - vn * rho.matrix() * vn.adjoint()) < 1e-8 * std::max(1.0, direct.trace));
    CHECK_THROWS_AS(power_apply(v, rho, -1), PreconditionError);
}
