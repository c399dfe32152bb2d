#include "catch_amalgamated.hpp"

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "zdistill/purification.hpp"

using namespace zdistill;

namespace {

ComplexMatrix diag(std::initializer_list<Complex> d) {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
    Index k = 0;
    for (Complex x : d) m(k, k) = x, ++k;
    return m;
}

} // namespace

TEST_CASE("identity cycle leaves the state alone") {
    std::mt19937_64 rng(1);
    const auto rho = testutil::random_density(rng, 3);
    const auto target = PureState::basis(3, 0);
    const auto tr = iterate(ComplexMatrix::Identity(3, 3), rho, 10, target);
    REQUIRE(tr.rows.size() == 11);
    for (const auto& r : tr.rows) {
        CHECK(r.yield == Catch::Approx(1.0).epsilon(1e-14));
        CHECK(r.fidelity == Catch::Approx(rho.expectation(target)).epsilon(1e-12));
        CHECK(r.purity == Catch::Approx(rho.purity()).epsilon(1e-12));
    }
}

TEST_CASE("diagonal cycle: asymptotics and trace against closed forms") {
    const ComplexMatrix v = diag({0.9, 0.1});
    const auto rho = DensityMatrix::maximally_mixed(2);
    const auto rep = asymptotics(v, rho);
    CHECK(std::abs(rep.lambda0 - 0.9) < 1e-15);
    CHECK(rep.target.overlap(PureState::basis(2, 0)) == Catch::Approx(1.0));
    CHECK(rep.prefactor == Catch::Approx(0.5));
    CHECK(rep.gap == Catch::Approx(1.0 / 9.0));
    CHECK_FALSE(rep.optimal);
    CHECK(rep.unique);
    CHECK(rep.populated_target() == std::optional<std::size_t>(0));

    const auto tr = iterate(v, rho, 30, PureState::basis(2, 0));
    for (const auto& r : tr.rows) {
        const double a = std::pow(0.81, r.n), b = std::pow(0.01, r.n);
        CHECK(r.yield == Catch::Approx(0.5 * (a + b)).epsilon(1e-12));
        CHECK(r.fidelity == Catch::Approx(a / (a + b)).epsilon(1e-12));
    }
    CHECK(rep.yield_limit(30) == Catch::Approx(tr.back().yield).epsilon(1e-12));
}

TEST_CASE("tied dominant magnitudes are reported, not hidden") {
    const auto rep = asymptotics(diag({1.0, -1.0, 0.2}), DensityMatrix::diagonal({1, 0, 1}));
    CHECK_FALSE(rep.unique);
    CHECK(rep.optimal);
    REQUIRE(rep.dominant.size() == 2);
    CHECK(rep.populated_target() == std::optional<std::size_t>(0));
    CHECK_FALSE(asymptotics(diag({1.0, -1.0, 0.2}), DensityMatrix::maximally_mixed(3)).populated_target());
    CHECK_THROWS_AS(convergence_steps(diag({1.0, -1.0, 0.2}), DensityMatrix::maximally_mixed(3), 1e-6), PreconditionError);
}

TEST_CASE("convergence steps") {
    const ComplexMatrix v = diag({1.0, 0.5});
    // 1 - F(N) = 4^-N / (1 + 4^-N)
    CHECK(convergence_steps(v, DensityMatrix::maximally_mixed(2), 1e-6) == 10);
    CHECK(convergence_steps(v, DensityMatrix::pure(PureState::basis(2, 0)), 1e-6) == 0);
    CHECK_THROWS_AS(convergence_steps(v, DensityMatrix::maximally_mixed(2), 0.0), PreconditionError);
}

TEST_CASE("yield underflow keeps the rows before it") {
    const ComplexMatrix v = 1e-100 * ComplexMatrix::Identity(2, 2);
    try {
        iterate(v, DensityMatrix::maximally_mixed(2), 5, PureState::basis(2, 0));
        FAIL("expected underflow");
    } catch (const TraceUnderflow& e) {
        CHECK(e.last_valid_n() == 1);
        CHECK(e.partial().rows.size() == 2);
    }
    CHECK_THROWS_AS(iterate(ComplexMatrix::Zero(2, 2), DensityMatrix::maximally_mixed(2), 5, PureState::basis(2, 0)),
                    YieldUnderflow);
}

TEST_CASE("trace csv") {
    const auto tr = iterate(diag({1.0, 0.5}), DensityMatrix::maximally_mixed(2), 2, PureState::basis(2, 0));
    std::ostringstream os;
    write_trace_csv(os, tr);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "N,yield,fidelity,purity");
    std::getline(is, line);
    CHECK(line == "0,1,0.5,0.5");
    int count = 1;
    while (std::getline(is, line)) ++count;
    CHECK(count == 3);
}

TEST_CASE("limit is independent of the initial state and follows the spectrum") {
    std::mt19937_64 rng(21);
    const ComplexMatrix v = testutil::random_matrix(rng, 5, 0.25);
    const auto sd = spectral_decompose(v);
    const double ratio = std::abs(sd.eigenvalues[1]) / std::abs(sd.eigenvalues[0]);
    const long n = static_cast<long>(std::ceil(std::log(1e-6) / std::log(ratio)));

    const auto rho_a = testutil::random_density(rng, 5);
    const auto rho_b = testutil::random_density(rng, 5);
    const auto rep_a = asymptotics(v, rho_a);
    const auto rep_b = asymptotics(v, rho_b);
    CHECK(rep_a.target.overlap(rep_b.target) == Catch::Approx(1.0).epsilon(1e-12));

    const auto tr_a = iterate(v, rho_a, n, rep_a.target);
    const auto tr_b = iterate(v, rho_b, n, rep_a.target);
    CHECK(tr_a.back().fidelity > 1.0 - 1e-6);
    CHECK(tr_b.back().fidelity > 1.0 - 1e-6);
    CHECK(tr_a.back().yield == Catch::Approx(rep_a.yield_limit(n)).epsilon(0.01));
    CHECK(tr_b.back().yield == Catch::Approx(rep_b.yield_limit(n)).epsilon(0.01));

    // direct products against the spectral power, N <= 20
    for (long m : {1L, 5L, 20L}) {
        const auto direct = power_apply(v, rho_a, m);
        CHECK(tr_a.rows[static_cast<std::size_t>(m)].yield == Catch::Approx(direct.trace).epsilon(1e-10));
    }
}
