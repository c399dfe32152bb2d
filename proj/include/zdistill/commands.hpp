#pragma once

// run / solve / verify as functions of a RunConfig; the executable only
// parses arguments and maps these onto exit codes.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "zdistill/acceptance.hpp"
#include "zdistill/cavity_model.hpp"
#include "zdistill/config.hpp"
#include "zdistill/protocol.hpp"
#include "zdistill/purification.hpp"
#include "zdistill/qubit_model.hpp"
#include "zdistill/report.hpp"

namespace zdistill::commands {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitUnderflow = 2;
inline constexpr int kExitFailed = 3;

struct QubitSetup {
    qubit::QubitParams params;
    std::optional<qubit::OptimalPoint> point;
};

inline QubitSetup qubit_setup(const RunConfig& cfg) {
    QubitSetup s;
    if (cfg.point_x) {
        const auto sol = qubit::solve_optimal_condition(*cfg.point_x, cfg.y_max);
        const auto want = cfg.point_branch == "primary" ? qubit::Branch::Primary : qubit::Branch::Shifted;
        std::vector<qubit::OptimalPoint> pts;
        for (const auto& r : sol.roots)
            if (r.branch == want) pts.push_back(r);
        if (static_cast<std::size_t>(cfg.point_root) >= pts.size()) {
            throw ConfigError("point_root " + std::to_string(cfg.point_root) + " out of range: " + std::to_string(pts.size()) +
                              " " + cfg.point_branch + " roots at x = " + std::to_string(*cfg.point_x));
        }
        s.point = pts[static_cast<std::size_t>(cfg.point_root)];
        s.params = qubit::params_from_point(*s.point);
        return s;
    }
    auto& p = s.params;
    p.omega = cfg.omega.value_or(p.omega);
    p.g_a = cfg.g_a.value_or(p.g_a);
    p.g_b = cfg.g_b.value_or(p.g_b);
    p.t_a = cfg.t_a.value_or(p.t_a);
    p.t_b = cfg.t_b.value_or(p.t_b);
    p.tau_a = cfg.tau_a.value_or(p.tau_a);
    p.tau_b = cfg.tau_b.value_or(p.tau_b);
    try {
        p.validate();
    } catch (const InvariantViolation& e) {
        throw ConfigError(e.what());
    }
    return s;
}

/// Products ga_ta / gb_tb, when given, fix t_a / t_b for the given couplings.
inline cavity::CavityParams cavity_setup(const RunConfig& cfg) {
    cavity::CavityParams p;
    p.omega = cfg.omega.value_or(p.omega);
    p.g_a = cfg.g_a.value_or(p.g_a);
    p.g_b = cfg.g_b.value_or(p.g_b);
    p.t_a = cfg.t_a.value_or(p.t_a);
    p.t_b = cfg.t_b.value_or(p.t_b);
    p.tau_a = cfg.tau_a.value_or(p.tau_a);
    p.tau_b = cfg.tau_b.value_or(p.tau_b);
    p.k_max = cfg.k_max.value_or(p.k_max);
    if (cfg.ga_ta) {
        if (cfg.t_a) throw ConfigError("set either t_a or ga_ta, not both");
        if (!(p.g_a > 0.0)) throw ConfigError("ga_ta needs g_a > 0");
        p.t_a = *cfg.ga_ta / p.g_a;
    }
    if (cfg.gb_tb) {
        if (cfg.t_b) throw ConfigError("set either t_b or gb_tb, not both");
        if (!(p.g_b > 0.0)) throw ConfigError("gb_tb needs g_b > 0");
        p.t_b = *cfg.gb_tb / p.g_b;
    }
    try {
        p.validate();
    } catch (const InvariantViolation& e) {
        throw ConfigError(e.what());
    }
    return p;
}

inline ProtocolProgram load_protocol(const RunConfig& cfg, const std::string& builtin_name, const ProtocolProgram& builtin) {
    if (cfg.protocol.empty() || cfg.protocol == builtin_name) return builtin;
    if (cfg.protocol == "one-way" || cfg.protocol == "round-trip") {
        throw ConfigError("protocol '" + cfg.protocol + "' does not belong to model '" + cfg.model + "'");
    }
    std::filesystem::path path(cfg.protocol);
    if (path.is_relative() && !cfg.base_dir.empty()) path = cfg.base_dir / path;
    if (!std::filesystem::exists(path)) throw ConfigError("protocol file '" + path.string() + "' does not exist");
    try {
        return parse_program(read_text_file(path));
    } catch (const ParseError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline DensityMatrix explicit_initial_state(const std::string& spec, Index dim) {
    std::vector<double> w = zdistill::detail::parse_list(spec, 0, "initial_state");
    if (static_cast<Index>(w.size()) != dim) {
        throw ConfigError("initial_state has " + std::to_string(w.size()) + " weights, expected " + std::to_string(dim));
    }
    try {
        return DensityMatrix::diagonal(w);
    } catch (const InvariantViolation& e) {
        throw ConfigError(e.what());
    }
}

struct RunOutcome {
    int exit_code = kExitOk;
    Json report;
    IterationTrace trace;
};

namespace detail {

inline void write_outputs(const std::string& prefix, const RunOutcome& out) {
    if (prefix.empty()) return;
    std::ofstream csv(prefix + "_trace.csv");
    if (!csv) throw ConfigError("cannot write '" + prefix + "_trace.csv'");
    write_trace_csv(csv, out.trace);
    std::ofstream js(prefix + "_report.json");
    if (!js) throw ConfigError("cannot write '" + prefix + "_report.json'");
    js << out.report.dump(2) << '\n';
}

} // namespace detail

/// Compiles the configured cycle, iterates it and characterizes the limit.
/// On underflow the partial trace is still written and the exit code is 2.
inline RunOutcome cmd_run(const RunConfig& cfg, const std::string& prefix) {
    RunOutcome out;
    Json rep;
    rep["model"] = cfg.model;
    rep["seed"] = cfg.seed;
    rep["n_iterations"] = cfg.n_iterations;
    rep["initial_state"] = cfg.initial_state;

    CompiledCycle cycle = [&]() -> CompiledCycle {
        if (cfg.model == "qubit") {
            const QubitSetup s = qubit_setup(cfg);
            rep["params"] = qubit::to_json(s.params);
            if (s.point) rep["point"] = qubit::to_json(*s.point);
            return compile_cycle(load_protocol(cfg, "one-way", qubit::one_way_program(s.params)), qubit::binding(s.params));
        }
        const auto p = cavity_setup(cfg);
        rep["params"] = cavity::to_json(p);
        return compile_cycle(load_protocol(cfg, "round-trip", cavity::round_trip_program(p)), cavity::binding(p));
    }();
    rep["protocol"] = to_text(cycle.source);

    DensityMatrix rho0;
    if (cfg.initial_state == "maximally-mixed") {
        rho0 = DensityMatrix::maximally_mixed(cycle.dim());
    } else if (cfg.initial_state == "vacuum-prepared") {
        if (cfg.model != "cavity") throw ConfigError("vacuum-prepared needs model = cavity");
        const auto p = cavity_setup(cfg);
        const auto prep = cavity::prepare_initial_state(DensityMatrix::maximally_mixed(cycle.dim()), p, cfg.prep_reps);
        rho0 = prep.state;
        rep["preparation"] = Json{{"reps", cfg.prep_reps}, {"yield", prep.yield}, {"residual", prep.residual}};
    } else {
        rho0 = explicit_initial_state(cfg.initial_state, cycle.dim());
    }

    const AsymptoticReport asym = asymptotics(cycle, rho0);
    PureState target = asym.target;
    std::string target_label = "u0";
    if (cfg.model == "qubit") {
        const QubitSetup s = qubit_setup(cfg);
        if (s.point) {
            target = qubit::target_state(s.point->chi).state;
            target_label = "psi_chi";
            rep["chi"] = s.point->chi;
        }
    } else {
        const auto p = cavity_setup(cfg);
        if (cavity::coupling_condition(p)) {
            target = cavity::target_state(p, 1);
            target_label = "psi_c_1";
        }
    }
    rep["target_label"] = target_label;
    rep["target"] = to_json(target.vector());
    rep["target_weight"] = rho0.expectation(target);
    rep["asymptotics"] = to_json(asym);

    try {
        out.trace = iterate(cycle, rho0, cfg.n_iterations, target);
        rep["final"] = to_json(out.trace.back());
        rep["status"] = "ok";
    } catch (const TraceUnderflow& e) {
        out.trace = e.partial();
        out.exit_code = kExitUnderflow;
        rep["final"] = out.trace.rows.empty() ? Json(nullptr) : to_json(out.trace.back());
        rep["status"] = "yield_underflow";
        rep["last_valid_n"] = e.last_valid_n();
    }
    out.report = std::move(rep);
    detail::write_outputs(prefix, out);
    return out;
}

/// One record per grid point; points outside the solver's domain carry a
/// `skipped` reason instead of roots.
inline Json cmd_solve(const RunConfig& cfg) {
    Json arr = Json::array();
    for (double x : cfg.x_grid) {
        try {
            arr.push_back(qubit::to_json(qubit::solve_optimal_condition(x, cfg.y_max)));
        } catch (const PreconditionError& e) {
            arr.push_back(Json{{"x", x}, {"skipped", e.what()}, {"roots", Json::array()}});
        }
    }
    return arr;
}

inline void print_summary(std::ostream& os, const acceptance::SuiteResult& s) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-4s %-40s %s\n", "id", "criterion", "result");
    os << buf;
    for (const auto& c : s.criteria) {
        std::snprintf(buf, sizeof buf, "%-4d %-40s %s\n", c.id, c.name.c_str(), c.passed ? "PASS" : "FAIL");
        os << buf;
        for (const auto& f : c.failures) os << "       - " << f << '\n';
    }
    os << (s.passed() ? "suite " + s.suite + ": PASS\n" : "suite " + s.suite + ": FAIL\n");
}

} // namespace zdistill::commands
