#pragma once

// Acceptance criteria 1-9 as library calls. Each returns its measured
// quantities and a pass flag; nothing here records wall time, so the JSON
// report of a suite depends only on the seed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "zdistill/appendix.hpp"
#include "zdistill/cavity_model.hpp"
#include "zdistill/linalg.hpp"
#include "zdistill/protocol.hpp"
#include "zdistill/purification.hpp"
#include "zdistill/qubit_model.hpp"
#include "zdistill/report.hpp"

namespace zdistill::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> failures;

    void metric(const std::string& key, double value) { metrics.emplace_back(key, value); }
    void fail(const std::string& what) { failures.push_back(what); }
    void finish() { passed = failures.empty(); }
};

inline Json to_json(const CriterionResult& r) {
    Json m = Json::object();
    for (const auto& [k, v] : r.metrics) m[k] = v;
    return Json{{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"metrics", m}, {"failures", r.failures}};
}

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::mt19937_64 rng_for(unsigned long long seed, int criterion) {
    std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu), static_cast<unsigned>(seed >> 32),
                      static_cast<unsigned>(criterion)};
    return std::mt19937_64(seq);
}

inline ComplexMatrix random_complex(Index r, Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexMatrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) {
            const double re = n(rng);
            const double im = n(rng);
            m(i, j) = Complex(re, im);
        }
    return m;
}

inline ComplexMatrix random_hermitian(Index d, std::mt19937_64& rng) {
    const ComplexMatrix a = random_complex(d, d, rng);
    return 0.5 * (a + a.adjoint());
}

inline DensityMatrix random_density(Index d, std::mt19937_64& rng) {
    const ComplexMatrix a = random_complex(d, d, rng);
    return DensityMatrix::normalized(a * a.adjoint());
}

inline cavity::CavityParams coupling_params(double gb_tb, int k_max) {
    cavity::CavityParams p;
    p.omega = 1.0;
    p.g_a = 1.0;
    p.t_a = std::numbers::pi / 2.0;
    p.g_b = 1.0;
    p.t_b = gb_tb;
    p.tau_a = 0.3;
    p.tau_b = 0.4;
    p.k_max = k_max;
    return p;
}

} // namespace detail

inline constexpr double kGenericGbTb[3] = {0.3, 0.7, 1.1};

// 1 -------------------------------------------------------------------------
inline CriterionResult spectral_equivalence(unsigned long long seed) {
    CriterionResult r{1, "spectral engine equivalence", false, {}, {}};
    auto rng = detail::rng_for(seed, 1);
    std::uniform_real_distribution<double> shrink(0.5, 1.0);
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
        ComplexMatrix v = detail::random_complex(6, 6, rng);
        Eigen::JacobiSVD<ComplexMatrix> svd(v);
        v *= shrink(rng) / svd.singularValues()(0);
        const DensityMatrix rho = detail::random_density(6, rng);
        const SpectralData sd = spectral_decompose(v);
        for (long n = 0; n <= 20; ++n) {
            const PowerResult direct = power_apply(v, rho, n);
            const ComplexMatrix vn = sd.power(n);
            const ComplexMatrix spectral = vn * rho.matrix() * vn.adjoint();
            Complex sum = 0.0;
            for (Index a = 0; a < sd.size(); ++a) {
                for (Index b = 0; b < sd.size(); ++b) {
                    Complex la = 1.0, lb = 1.0;
                    for (long t = 0; t < n; ++t) {
                        la *= sd.eigenvalues[static_cast<std::size_t>(a)];
                        lb *= std::conj(sd.eigenvalues[static_cast<std::size_t>(b)]);
                    }
                    sum += la * lb * sd.v(a).dot(rho.matrix() * sd.v(b)) * sd.u(b).dot(sd.u(a));
                }
            }
            worst = std::max({worst, max_abs(direct.matrix - spectral), std::abs(direct.trace - sum)});
        }
    }
    r.metric("operators", 50);
    r.metric("max_abs_error", worst);
    if (!(worst <= 1e-8)) r.fail("direct vs spectral error " + detail::fmt(worst));
    r.finish();
    return r;
}

// 2 -------------------------------------------------------------------------
inline CriterionResult eigenvalue_bound(unsigned long long seed) {
    CriterionResult r{2, "eigenvalue bound", false, {}, {}};
    auto rng = detail::rng_for(seed, 2);
    std::uniform_int_distribution<int> dim(2, 4), nsteps(1, 6), kind(0, 9);
    std::uniform_real_distribution<double> dur(0.0, 3.0), ang(0.0, 2.0 * std::numbers::pi);
    const char* labels[4] = {"up", "down", "plus", "tilt"};
    std::uniform_int_distribution<int> pick(0, 3);
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
        ModelBinding b;
        b.rest_dim = dim(rng);
        const Index full = b.full_dim();
        b.free_hamiltonian = HermitianOperator(detail::random_hermitian(full, rng));
        b.interactions["A"] = HermitianOperator(detail::random_hermitian(full, rng));
        b.interactions["B"] = HermitianOperator(detail::random_hermitian(full, rng));
        ComplexVector up(2), down(2), plus(2), tilt(2);
        up << 1.0, 0.0;
        down << 0.0, 1.0;
        plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
        const double th = ang(rng), ph = ang(rng);
        tilt << std::cos(th / 2), std::exp(kI * ph) * std::sin(th / 2);
        b.mediator_states = {{"up", up}, {"down", down}, {"plus", plus}, {"tilt", tilt}};

        ProgramBuilder pb("X");
        pb.prepare(labels[pick(rng)]);
        const int n = nsteps(rng);
        for (int k = 0; k < n; ++k) {
            const int c = kind(rng);
            if (c < 4) pb.interact("A", dur(rng));
            else if (c < 7) pb.interact("B", dur(rng));
            else if (c < 9) pb.free(dur(rng));
            else pb.project(labels[pick(rng)]);
        }
        pb.project(labels[pick(rng)]);
        try {
            const CompiledCycle cyc = compile_cycle(pb.build(), b);
            worst = std::max(worst, spectral_radius(cyc.matrix));
        } catch (const InvariantViolation& e) {
            r.fail(std::string("compilation ") + std::to_string(s) + ": " + e.what());
        }
    }
    r.metric("compilations", 50);
    r.metric("max_abs_eigenvalue", worst);
    if (worst > 1.0 + 1e-9) r.fail("max |lambda| = " + detail::fmt(worst));
    r.finish();
    return r;
}

// 3 -------------------------------------------------------------------------
inline CriterionResult qubit_closed_forms() {
    CriterionResult r{3, "qubit closed forms", false, {}, {}};
    const double xs[5] = {0.35, 0.95, 1.55, 2.15, 2.75};
    const double ys[5] = {0.4, 1.2, 2.0, 2.8, 3.6};
    const double zs[5] = {0.0, 0.75, 1.5, 2.25, 3.0};
    double worst = 0.0;
    for (double x : xs)
        for (double y : ys)
            for (double z : zs) {
                qubit::QubitParams p;
                p.omega = 1.0;
                p.g_a = p.g_b = x / y;
                p.t_a = p.t_b = y;
                p.tau_a = p.tau_b = z;
                const ComplexMatrix product = qubit::qubit_operator(p).matrix;
                const ComplexMatrix closed = qubit::closed_form_blocks(p).assemble();
                worst = std::max(worst, max_abs(product - closed));
            }
    r.metric("grid_points", 125);
    r.metric("max_abs_error", worst);
    if (!(worst <= 1e-10)) r.fail("block mismatch " + detail::fmt(worst));
    r.finish();
    return r;
}

// 4 -------------------------------------------------------------------------
inline CriterionResult qubit_optimal_distillation() {
    CriterionResult r{4, "qubit optimal distillation", false, {}, {}};
    qubit::DistillationOptions opt;
    opt.n_max = 200;
    opt.fidelity_eps = 1e-6;
    opt.min_gap = 1e-3;
    opt.yield_tol = 1e-4;
    const DensityMatrix rho0 = DensityMatrix::maximally_mixed(4);
    int roots = 0;
    double max_res = 0.0, min_delta = 1.0, max_yield_dev = 0.0;
    long max_steps = 0;
    for (double x : {2.6, 2.8, 3.0}) {
        const auto sol = qubit::solve_optimal_condition(x);
        if (sol.roots.empty()) r.fail("no root at x = " + detail::fmt(x));
        for (std::size_t k = 0; k < sol.roots.size(); ++k) {
            const auto& pt = sol.roots[k];
            const auto rep = qubit::verify_distillation(pt, rho0, opt);
            ++roots;
            max_res = std::max(max_res, rep.eigen_residual);
            min_delta = std::min(min_delta, rep.delta);
            max_yield_dev = std::max(max_yield_dev, std::abs(rep.final_yield - 0.25));
            max_steps = std::max(max_steps, rep.steps_to_fidelity < 0 ? opt.n_max + 1 : rep.steps_to_fidelity);
            const std::string where = "x=" + detail::fmt(x) + " y=" + detail::fmt(pt.y) + " " + qubit::to_string(pt.branch) + ": ";
            for (const auto& c : rep.checks) {
                if (c.passed) continue;
                if (c.name == "fidelity") {
                    r.fail(where + "1 - F(" + std::to_string(opt.n_max) + ") = " + detail::fmt(1.0 - rep.final_fidelity) +
                           " > " + detail::fmt(opt.fidelity_eps));
                } else {
                    r.fail(where + c.name + " (" + c.detail + " = " + detail::fmt(c.value) + ")");
                }
            }
        }
    }
    r.metric("roots", roots);
    r.metric("max_eigen_residual", max_res);
    r.metric("min_delta", min_delta);
    r.metric("max_steps_to_fidelity", static_cast<double>(max_steps));
    r.metric("max_yield_deviation", max_yield_dev);
    r.finish();
    return r;
}

// 5 -------------------------------------------------------------------------
inline CriterionResult cavity_closed_form(unsigned long long seed) {
    CriterionResult r{5, "cavity closed form", false, {}, {}};
    auto rng = detail::rng_for(seed, 5);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    double worst = 0.0, vac_closed = 0.0, vac_compiled = 0.0;
    for (int s = 0; s < 10; ++s) {
        cavity::CavityParams p;
        p.omega = u(rng);
        p.g_a = u(rng);
        p.g_b = u(rng);
        p.t_a = u(rng);
        p.t_b = u(rng);
        p.tau_a = u(rng);
        p.tau_b = u(rng);
        p.k_max = 8;
        const ComplexMatrix closed = cavity::build_Vc_closed(p).matrix;
        const ComplexMatrix product = compile_cycle(cavity::round_trip_program(p), cavity::binding(p)).matrix;
        worst = std::max(worst, max_abs(closed - product));
        vac_closed = std::max(vac_closed, closed.col(0).cwiseAbs().maxCoeff());
        vac_compiled = std::max(vac_compiled, product.col(0).cwiseAbs().maxCoeff());
    }
    r.metric("draws", 10);
    r.metric("max_abs_error", worst);
    r.metric("vacuum_image_closed", vac_closed);
    r.metric("vacuum_image_compiled", vac_compiled);
    if (!(worst <= 1e-10)) r.fail("closed vs product " + detail::fmt(worst));
    if (vac_closed != 0.0) r.fail("closed form does not annihilate the vacuum");
    if (!(vac_compiled <= 1e-10)) r.fail("compiled vacuum image " + detail::fmt(vac_compiled));
    r.finish();
    return r;
}

// 6 -------------------------------------------------------------------------
inline CriterionResult cavity_doublet() {
    CriterionResult r{6, "cavity doublet", false, {}, {}};
    double worst_unit = 0.0, worst_zero = 0.0, worst_vec = 0.0, worst_phase = 0.0;
    for (double b : kGenericGbTb) {
        const auto p = detail::coupling_params(b, 2);
        const ComplexMatrix v = compile_cycle(cavity::round_trip_program(p), cavity::binding(p)).matrix;
        const SpectralData sd = spectral_decompose(cavity::sector_block(v, 1));
        ComplexVector expect(2);
        expect << std::cos(b), std::sin(b);
        const double unit = std::abs(std::abs(sd.eigenvalues[0]) - 1.0);
        const double zero = std::abs(sd.eigenvalues[1]);
        const double vec = 1.0 - PureState(sd.u(0)).overlap(PureState(expect));
        const double phase = std::abs(sd.eigenvalues[0] + std::exp(-2.0 * kI * p.omega * p.T()));
        worst_unit = std::max(worst_unit, unit);
        worst_zero = std::max(worst_zero, zero);
        worst_vec = std::max(worst_vec, vec);
        worst_phase = std::max(worst_phase, phase);
        const std::string tag = "g_B t_B = " + detail::fmt(b) + ": ";
        if (!(unit <= 1e-9)) r.fail(tag + "| |lambda0| - 1 | = " + detail::fmt(unit));
        if (!(zero <= 1e-9)) r.fail(tag + "second eigenvalue " + detail::fmt(zero));
        if (!(vec <= 1e-9)) r.fail(tag + "eigenvector overlap defect " + detail::fmt(vec));
        if (!(phase <= 1e-9)) r.fail(tag + "eigenvalue phase " + detail::fmt(phase));
    }
    r.metric("max_unit_defect", worst_unit);
    r.metric("max_zero_eigenvalue", worst_zero);
    r.metric("max_overlap_defect", worst_vec);
    r.metric("max_phase_error", worst_phase);
    r.finish();
    return r;
}

// 7 -------------------------------------------------------------------------
inline CriterionResult sector_splitting() {
    CriterionResult r{7, "sector splitting and higher targets", false, {}, {}};
    double worst_d2 = 0.0, worst_res = 0.0;
    for (double b : kGenericGbTb) {
        const auto p = detail::coupling_params(b, 8);
        const ComplexMatrix v = compile_cycle(cavity::round_trip_program(p), cavity::binding(p)).matrix;
        double upper = 0.0;
        int upper_k = 0;
        for (int k = 2; k <= 8; ++k) {
            const auto s = cavity::sector_matrix(k, p);
            const ComplexMatrix blk = cavity::sector_block(v, k);
            const double d2 = std::max(std::abs(s.d_at(2)), std::abs(blk(k - 2, k - 1)));
            worst_d2 = std::max(worst_d2, d2);
            const PureState psi = cavity::target_state(p, k);
            const Complex lam = -std::exp(-2.0 * kI * static_cast<double>(k) * p.omega * p.T());
            const double res = (v * psi.vector() - lam * psi.vector()).cwiseAbs().maxCoeff();
            worst_res = std::max(worst_res, res);
            const auto rep = cavity::sector_report(p, k);
            if (rep.upper_max_abs > upper) {
                upper = rep.upper_max_abs;
                upper_k = k;
            }
            const std::string tag = "g_B t_B = " + detail::fmt(b) + " k = " + std::to_string(k) + ": ";
            if (!(d2 <= 1e-12)) r.fail(tag + "d_2 = " + detail::fmt(d2));
            if (!(res <= 1e-9)) r.fail(tag + "target residual " + detail::fmt(res));
            if (rep.upper_max_abs > 1.0 - 1e-3) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.9f", rep.upper_max_abs);
                r.fail(tag + "subsector max |eig| = " + buf);
            }
        }
        char key[64];
        std::snprintf(key, sizeof key, "upper_max_abs_gbtb_%.1f", b);
        r.metric(key, upper);
        std::snprintf(key, sizeof key, "upper_max_k_gbtb_%.1f", b);
        r.metric(key, upper_k);
    }
    r.metric("max_d2", worst_d2);
    r.metric("max_target_residual", worst_res);
    r.finish();
    return r;
}

// 8 -------------------------------------------------------------------------
inline CriterionResult appendix_identities(unsigned long long seed) {
    CriterionResult r{8, "appendix identities", false, {}, {}};
    auto rng = detail::rng_for(seed, 8);
    std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
    std::uniform_int_distribution<int> kd(2, 9);
    double worst_rec = 0.0, worst_exp = 0.0, min_term = 0.0;
    for (int s = 0; s < 100; ++s) {
        const appendix::Angles g{u(rng), u(rng)};
        const int k = kd(rng);
        try {
            const auto ser = appendix::recursion_P(k, g);
            const auto rec = appendix::recurrence_I(k, g);
            for (int i = 2; i <= k; ++i) {
                const double bf = appendix::bruteforce_I(i, k, g);
                worst_rec = std::max({worst_rec, std::abs(ser.I_at(i) - bf), std::abs(rec[static_cast<std::size_t>(i - 2)] - bf)});
            }
            worst_exp = std::max(worst_exp, std::abs(appendix::explicit_Pk(k, g) - ser.P_at(k)));
            for (double t : appendix::explicit_Pk_terms(k, g)) min_term = std::min(min_term, t);
        } catch (const InvariantViolation& e) {
            r.fail(std::string("draw ") + std::to_string(s) + ": " + e.what());
        }
    }
    r.metric("max_recursion_error", worst_rec);
    r.metric("max_explicit_error", worst_exp);
    r.metric("min_explicit_term", min_term);
    if (!(worst_rec <= 1e-10)) r.fail("recursion vs determinant " + detail::fmt(worst_rec));
    if (!(worst_exp <= 1e-10)) r.fail("explicit vs recursion " + detail::fmt(worst_exp));
    if (min_term < -1e-15) r.fail("negative explicit term");

    double worst_p9 = 0.0;
    for (double b : kGenericGbTb) {
        worst_p9 = std::max(worst_p9, std::abs(appendix::recursion_P(9, {std::numbers::pi / 2.0, b}).P_at(9)));
    }
    r.metric("max_abs_p9", worst_p9);
    if (!(worst_p9 <= 1e-10)) r.fail("P_9 = " + detail::fmt(worst_p9));

    const auto pos = appendix::positivity_scan(9, 1000, seed);
    r.metric("positivity_samples", pos.samples);
    r.metric("positivity_violations", static_cast<double>(pos.violations.size()));
    r.metric("min_j", pos.min_J);
    if (!pos.passed()) r.fail(std::to_string(pos.violations.size()) + " non-positive J_i");

    int rows = 0, plus_one = 0;
    std::vector<appendix::Angles> points;
    for (double b : kGenericGbTb) points.push_back({std::numbers::pi / 2.0, b});
    for (int s = 0; s < 5; ++s) points.push_back({u(rng), u(rng)});
    for (const auto& g : points) {
        try {
            for (const auto& row : appendix::unit_eigenvalue_scan(2, 9, g)) {
                ++rows;
                if (row.plus_one) ++plus_one;
            }
        } catch (const ConsistencyError& e) {
            r.fail(e.what());
        }
    }
    r.metric("unit_scan_rows", rows);
    r.metric("unit_scan_plus_one", plus_one);
    r.finish();
    return r;
}

// 9 -------------------------------------------------------------------------
inline CriterionResult end_to_end() {
    CriterionResult r{9, "end-to-end distillation", false, {}, {}};
    const auto p = detail::coupling_params(0.7, 6);
    const cavity::FockBasis basis(p.k_max);
    const auto prep = cavity::prepare_initial_state(DensityMatrix::maximally_mixed(basis.size()), p, 40);
    const PureState psi = cavity::target_state(p, 1);
    const double w0 = prep.state.expectation(psi);
    const CompiledCycle v = compile_cycle(cavity::round_trip_program(p), cavity::binding(p));
    const IterationTrace tr = iterate(v, prep.state, 100, psi);
    long first = -1;
    for (const auto& row : tr.rows) {
        if (row.fidelity > 1.0 - 1e-4) {
            first = row.n;
            break;
        }
    }
    const double infid = 1.0 - tr.back().fidelity;
    const double dy = tr.back().yield - w0;
    r.metric("k_max", p.k_max);
    r.metric("gb_tb", p.gb_tb());
    r.metric("preparation_residual", prep.residual);
    r.metric("target_weight", w0);
    r.metric("first_n_above_threshold", static_cast<double>(first));
    r.metric("final_infidelity", infid);
    r.metric("yield_deviation", dy);
    if (first < 0 || !(infid < 1e-4)) r.fail("fidelity 1 - F = " + detail::fmt(infid) + " at N = 100");
    if (!(std::abs(dy) <= 1e-3)) r.fail("yield deviation " + detail::fmt(dy));
    r.finish();
    return r;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"qubit", "cavity", "appendix", "all"};
    return names;
}

inline bool is_suite(const std::string& s) {
    const auto& n = suite_names();
    return std::find(n.begin(), n.end(), s) != n.end();
}

inline std::vector<int> suite_criteria(const std::string& suite) {
    if (suite == "qubit") return {1, 2, 3, 4};
    if (suite == "cavity") return {5, 6, 7, 9};
    if (suite == "appendix") return {8};
    if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9};
    throw PreconditionError("unknown suite '" + suite + "'");
}

inline CriterionResult run_criterion(int id, unsigned long long seed) {
    switch (id) {
    case 1: return spectral_equivalence(seed);
    case 2: return eigenvalue_bound(seed);
    case 3: return qubit_closed_forms();
    case 4: return qubit_optimal_distillation();
    case 5: return cavity_closed_form(seed);
    case 6: return cavity_doublet();
    case 7: return sector_splitting();
    case 8: return appendix_identities(seed);
    case 9: return end_to_end();
    }
    throw PreconditionError("no criterion " + std::to_string(id));
}

struct SuiteResult {
    std::string suite;
    unsigned long long seed = 42;
    std::vector<CriterionResult> criteria;

    bool passed() const {
        return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
    }
};

/// `on_done` is called after each criterion, e.g. to print progress.
inline SuiteResult run_suite(const std::string& suite, unsigned long long seed,
                             const std::function<void(const CriterionResult&)>& on_done = {}) {
    SuiteResult out;
    out.suite = suite;
    out.seed = seed;
    for (int id : suite_criteria(suite)) {
        out.criteria.push_back(run_criterion(id, seed));
        if (on_done) on_done(out.criteria.back());
    }
    return out;
}

inline Json to_json(const SuiteResult& s) {
    Json crit = Json::array();
    for (const auto& c : s.criteria) crit.push_back(to_json(c));
    return Json{{"suite", s.suite}, {"seed", s.seed}, {"passed", s.passed()}, {"criteria", crit}};
}

} // namespace zdistill::acceptance
