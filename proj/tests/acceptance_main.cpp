// Acceptance criteria 1-10, one result line each.
//
//   zdistill_acceptance [--cli PATH] [--workdir DIR] [--seed N]
//
// Criterion 10 runs `PATH verify all` twice and compares the written
// reports byte for byte; without --cli it compares two in-process runs.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <string>

#include "zdistill/acceptance.hpp"

namespace {

using namespace zdistill;

const std::map<int, double> kBudgetSeconds = {{1, 5.0}, {2, 5.0}, {3, 10.0}, {4, 10.0}, {5, 20.0},
                                              {6, 2.0}, {7, 10.0}, {8, 30.0}, {9, 10.0}};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

bool line(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("criterion %2d %s  %-38s %s\n", id, ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    std::filesystem::path workdir = std::filesystem::temp_directory_path();
    unsigned long long seed = 42;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cli" && i + 1 < argc) cli = argv[++i];
        else if (a == "--workdir" && i + 1 < argc) workdir = argv[++i];
        else if (a == "--seed" && i + 1 < argc) seed = std::stoull(argv[++i]);
        else {
            std::cerr << "usage: zdistill_acceptance [--cli PATH] [--workdir DIR] [--seed N]\n";
            return 2;
        }
    }

    bool all_ok = true;
    acceptance::SuiteResult suite;
    suite.suite = "all";
    suite.seed = seed;
    for (int id : acceptance::suite_criteria("all")) {
        const auto t0 = std::chrono::steady_clock::now();
        acceptance::CriterionResult r;
        try {
            r = acceptance::run_criterion(id, seed);
        } catch (const std::exception& e) {
            r.id = id;
            r.name = "(exception)";
            r.fail(e.what());
            r.finish();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double budget = kBudgetSeconds.at(id);
        char detail[96];
        std::snprintf(detail, sizeof detail, "%.2f s (budget %.0f s)", secs, budget);
        const bool ok = line(id, r.name, r.passed && secs < budget, detail);
        for (const auto& f : r.failures) std::printf("             - %s\n", f.c_str());
        if (secs >= budget) std::printf("             - runtime over budget\n");
        all_ok = ok && all_ok;
        suite.criteria.push_back(std::move(r));
    }

    // 10: determinism
    bool same = false;
    std::string how;
    if (!cli.empty()) {
        const auto a = workdir / "determinism_a";
        const auto b = workdir / "determinism_b";
        std::filesystem::remove(a.string() + "_verify.json");
        std::filesystem::remove(b.string() + "_verify.json");
        for (const auto& prefix : {a, b}) {
            const std::string cmd = shell_quote(cli) + " verify all --out " + shell_quote(prefix.string()) + " > /dev/null 2>&1";
            [[maybe_unused]] const int rc = std::system(cmd.c_str()); // 3 while other criteria fail
        }
        const std::string ra = slurp(a.string() + "_verify.json");
        const std::string rb = slurp(b.string() + "_verify.json");
        same = !ra.empty() && ra == rb;
        how = "two `zdistill verify all` reports, " + std::to_string(ra.size()) + " bytes";
    } else {
        const std::string ra = acceptance::to_json(acceptance::run_suite("all", seed)).dump(2);
        const std::string rb = acceptance::to_json(acceptance::run_suite("all", seed)).dump(2);
        same = ra == rb;
        how = "two in-process suite reports";
    }
    all_ok = line(10, "determinism", same, how + (same ? " identical" : " differ")) && all_ok;

    std::printf("%s\n", all_ok ? "acceptance: all criteria pass" : "acceptance: some criteria fail");
    return all_ok ? 0 : 1;
}
