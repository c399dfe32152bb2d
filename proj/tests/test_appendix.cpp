#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "zdistill/appendix.hpp"

using namespace zdistill;
using namespace zdistill::appendix;
using cavity::c_coeff;
using cavity::d_coeff;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

} // namespace

TEST_CASE("small determinants by hand") {
    const Angles g{0.83, 2.1};
    const int k = 6;
    CHECK(bruteforce_I(2, k, g) == Catch::Approx(c_coeff(2, k, g.a, g.b) - 1.0).epsilon(1e-14));
    const double i3 = (c_coeff(3, k, g.a, g.b) - 1.0) * (c_coeff(2, k, g.a, g.b) - 1.0) - std::pow(d_coeff(3, k, g.a, g.b), 2);
    CHECK(bruteforce_I(3, k, g) == Catch::Approx(i3).epsilon(1e-13));
    const double j3 = (c_coeff(3, k, g.a, g.b) + 1.0) * (c_coeff(2, k, g.a, g.b) + 1.0) - std::pow(d_coeff(3, k, g.a, g.b), 2);
    CHECK(bruteforce_J(3, k, g) == Catch::Approx(j3).epsilon(1e-13));
    CHECK(bruteforce_J(2, k, g) == Catch::Approx(c_coeff(2, k, g.a, g.b) + 1.0).epsilon(1e-14));
    CHECK_THROWS_AS(bruteforce_I(1, k, g), PreconditionError);
    CHECK_THROWS_AS(bruteforce_I(7, k, g), PreconditionError);
}

TEST_CASE("frozen determinants at a random point") {
    const Angles g{0.83, 2.1};
    const auto s = recursion_P(5, g);
    CHECK(s.P_at(5) == Catch::Approx(0.00320933611241888).epsilon(1e-10));
    CHECK(bruteforce_I(5, 5, g) == Catch::Approx(0.003209336112418891).epsilon(1e-10));
    CHECK(bruteforce_J(5, 5, g) == Catch::Approx(5.233807555612107).epsilon(1e-12));
    CHECK(s.J_at(5) == Catch::Approx(5.233807555612107).epsilon(1e-12));
}

TEST_CASE("recursion, recurrence, unrolled sum and direct determinant agree") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
    for (int trial = 0; trial < 50; ++trial) {
        const Angles g{u(rng), u(rng)};
        for (int k = 2; k <= 9; ++k) {
            const auto s = recursion_P(k, g);
            const auto rec = recurrence_I(k, g);
            for (int i = 2; i <= k; ++i) {
                const double direct = bruteforce_I(i, k, g);
                CHECK(std::abs(s.I_at(i) - direct) < 1e-10);
                CHECK(std::abs(rec[static_cast<std::size_t>(i - 2)] - direct) < 1e-10);
                CHECK(std::abs(s.J_at(i) - bruteforce_J(i, k, g)) < 1e-10);
                CHECK(s.P_at(i) >= -1e-12);
            }
            CHECK(std::abs(explicit_Pk(k, g) - s.P_at(k)) < 1e-12);
            const auto terms = explicit_Pk_terms(k, g);
            CHECK(terms.size() == static_cast<std::size_t>(k));
            for (double t : terms) CHECK(t >= 0.0);
        }
    }
}

TEST_CASE("P_k under the coupling condition is frozen") {
    const std::vector<std::pair<double, std::vector<double>>> table = {
        {0.3, {0.42216475665054193, 0.369878832829613, 0.35477250941219307, 0.26894289919364694, 0.12331513052248874,
               0.024650651740529203, 0.0011295393122278455}},
        {0.7, {0.6296307138224093, 0.5780655478015428, 0.38919947909994457, 0.1298665104513594, 0.014937459537706563,
               0.00036011309525594794, 5.950387253770944e-07}},
        {1.1, {0.869734335370127, 0.6741242332497135, 0.1911214644572527, 0.011032916013396846, 1.461166137972968e-06,
               7.565293875135456e-08, 2.940784758806012e-09}},
    };
    for (const auto& [b, ps] : table) {
        const Angles g{kHalfPi, b};
        for (int k = 2; k <= 8; ++k) {
            const double got = recursion_P(k, g).P_at(k);
            CHECK(got == Catch::Approx(ps[static_cast<std::size_t>(k - 2)]).epsilon(1e-9));
            CHECK(got > 0.0);
        }
        // level 9 of A is a node: sqrt(9) pi/2 = 3 pi/2
        CHECK(std::abs(recursion_P(9, g).P_at(9)) < 1e-30);
    }
}

TEST_CASE("unit eigenvalue scan") {
    const auto rows = unit_eigenvalue_scan(2, 9, {kHalfPi, 0.7});
    REQUIRE(rows.size() == 8);
    for (const auto& r : rows) {
        if (r.k < 9) {
            CHECK_FALSE(r.plus_one);
            CHECK(r.max_abs_eig < 1.0);
        } else {
            CHECK(r.plus_one);
            CHECK(r.determinant_zero);
        }
        CHECK_FALSE(r.minus_one);
    }
    const auto off = unit_eigenvalue_scan(3, 3, {1.0, 0.7});
    CHECK(std::abs(off.front().Pk) > 1e-6);
    CHECK_FALSE(off.front().plus_one);
}

TEST_CASE("positivity scan") {
    const auto rep = positivity_scan(9, 1000, 42);
    CHECK(rep.passed());
    CHECK(rep.min_J > 0.0);
    CHECK(rep.samples == 1000);
}

TEST_CASE("scan csv") {
    std::ostringstream os;
    write_scan_csv(os, unit_eigenvalue_scan(2, 3, {kHalfPi, 0.3}));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "k,gAtA,gBtB,Pk,Jk,max_abs_eig");
    std::getline(is, line);
    CHECK(line.rfind("2,", 0) == 0);
}
