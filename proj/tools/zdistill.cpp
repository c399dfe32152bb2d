// zdistill run|solve|verify [--config PATH] [--out PREFIX] [--seed N]

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "zdistill/commands.hpp"

namespace {

using namespace zdistill;

RunConfig config_from(const std::string& path, const std::optional<unsigned long long>& seed) {
    RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

std::string prefix_from(const std::string& out, const RunConfig& cfg) { return out.empty() ? cfg.output : out; }

int do_run(const std::string& config, const std::string& out, const std::optional<unsigned long long>& seed) {
    const RunConfig cfg = config_from(config, seed);
    std::string prefix = prefix_from(out, cfg);
    if (prefix.empty()) prefix = "zdistill";
    const auto res = commands::cmd_run(cfg, prefix);
    if (res.exit_code == commands::kExitUnderflow) {
        std::cerr << "zdistill: yield underflow after N = " << res.report["last_valid_n"].get<long>() << '\n';
    } else {
        const auto& last = res.trace.back();
        std::printf("N = %ld  yield = %.10g  fidelity = %.10g  purity = %.10g\n", last.n, last.yield, last.fidelity, last.purity);
    }
    std::cout << "wrote " << prefix << "_trace.csv and " << prefix << "_report.json\n";
    return res.exit_code;
}

int do_solve(const std::string& config, const std::string& out, const std::optional<unsigned long long>& seed) {
    const RunConfig cfg = config_from(config, seed);
    const Json j = commands::cmd_solve(cfg);
    const std::string prefix = prefix_from(out, cfg);
    if (prefix.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        std::ofstream f(prefix + "_solve.json");
        if (!f) throw ConfigError("cannot write '" + prefix + "_solve.json'");
        f << j.dump(2) << '\n';
        std::cout << "wrote " << prefix << "_solve.json\n";
    }
    return commands::kExitOk;
}

int do_verify(const std::string& suite, const std::string& config, const std::string& out,
              const std::optional<unsigned long long>& seed, const std::string& usage) {
    if (!acceptance::is_suite(suite)) {
        std::cerr << "zdistill: unknown suite '" << suite << "' (expected qubit, cavity, appendix or all)\n" << usage;
        return commands::kExitConfig;
    }
    const RunConfig cfg = config_from(config, seed);
    const auto res = acceptance::run_suite(suite, cfg.seed);
    commands::print_summary(std::cout, res);
    const std::string prefix = prefix_from(out, cfg);
    if (!prefix.empty()) {
        std::ofstream f(prefix + "_verify.json");
        if (!f) throw ConfigError("cannot write '" + prefix + "_verify.json'");
        f << acceptance::to_json(res).dump(2) << '\n';
    }
    if (!res.passed()) {
        std::cerr << "failing checks:";
        for (const auto& c : res.criteria)
            if (!c.passed) std::cerr << ' ' << c.id << " (" << c.name << ")";
        std::cerr << '\n';
        return commands::kExitFailed;
    }
    return commands::kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Repeated-measurement entanglement distillation: simulation and checks"};
    app.require_subcommand(1);

    std::string config, out, suite = "all";
    std::optional<unsigned long long> seed;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "run configuration (key = value)");
        sub->add_option("--out", out, "output path prefix");
        sub->add_option("--seed", seed, "seed for sampled checks (default 42)");
    };
    auto* run = app.add_subcommand("run", "iterate a protocol and write <prefix>_trace.csv, <prefix>_report.json");
    auto* solve = app.add_subcommand("solve", "solve the optimality condition on the configured x_grid");
    auto* verify = app.add_subcommand("verify", "run an acceptance suite: qubit, cavity, appendix or all");
    add_common(run);
    add_common(solve);
    add_common(verify);
    verify->add_option("suite", suite, "suite name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : commands::kExitConfig;
    }

    try {
        if (*run) return do_run(config, out, seed);
        if (*solve) return do_solve(config, out, seed);
        return do_verify(suite, config, out, seed, app.help());
    } catch (const ConfigError& e) {
        std::cerr << "zdistill: config error: " << e.what() << '\n';
        return commands::kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "zdistill: " << e.what() << '\n';
        return commands::kExitConfig;
    } catch (const YieldUnderflow& e) {
        std::cerr << "zdistill: " << e.what() << '\n';
        return commands::kExitUnderflow;
    } catch (const Error& e) {
        std::cerr << "zdistill: " << e.what() << '\n';
        return commands::kExitConfig;
    }
}
