#pragma once

// Flat `key = value` run configuration. '#' starts a comment; unknown or
// repeated keys are errors.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "zdistill/error.hpp"

namespace zdistill {

struct RunConfig {
    std::string model = "qubit";
    std::optional<double> omega, g_a, g_b, t_a, t_b, tau_a, tau_b;
    std::optional<double> ga_ta, gb_tb;
    std::optional<int> k_max;
    std::optional<double> point_x;
    int point_root = 0;
    std::string point_branch = "primary";
    double y_max = 10.0;
    std::string protocol;              ///< "one-way", "round-trip" or a .qproto path; empty = model default
    std::string initial_state = "maximally-mixed";
    int prep_reps = 40;
    long n_iterations = 200;
    std::string output;                ///< path prefix
    unsigned long long seed = 42;
    std::vector<double> x_grid = {2.6, 2.8, 3.0};
    std::filesystem::path base_dir;    ///< directory of the config file
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view v, std::size_t line, const std::string& key) {
    T out{};
    const char* first = v.data();
    const char* last = v.data() + v.size();
    if (!v.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("line " + std::to_string(line) + ": invalid number '" + std::string(v) + "' for " + key);
    }
    return out;
}

/// Comma- or whitespace-separated list of reals.
inline std::vector<double> parse_list(std::string_view v, std::size_t line, const std::string& key) {
    std::vector<double> out;
    std::string buf(v);
    for (char& c : buf)
        if (c == ',') c = ' ';
    std::istringstream is(buf);
    std::string tok;
    while (is >> tok) out.push_back(parse_number<double>(tok, line, key));
    if (out.empty()) throw ConfigError("line " + std::to_string(line) + ": empty list for " + key);
    return out;
}

} // namespace detail

inline RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
    RunConfig cfg;
    cfg.base_dir = base_dir;
    std::map<std::string, std::size_t> seen;
    std::istringstream is{std::string(text)};
    std::string raw;
    std::size_t line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string_view s = raw;
        if (const auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key(detail::trim(s.substr(0, eq)));
        const std::string_view val = detail::trim(s.substr(eq + 1));
        if (key.empty() || val.empty()) throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        if (auto [it, fresh] = seen.emplace(key, line); !fresh) {
            throw ConfigError("line " + std::to_string(line) + ": '" + key + "' already set on line " + std::to_string(it->second));
        }
        auto real = [&] { return detail::parse_number<double>(val, line, key); };
        auto integer = [&] { return detail::parse_number<long>(val, line, key); };

        if (key == "model") cfg.model = val;
        else if (key == "omega") cfg.omega = real();
        else if (key == "g_a") cfg.g_a = real();
        else if (key == "g_b") cfg.g_b = real();
        else if (key == "t_a") cfg.t_a = real();
        else if (key == "t_b") cfg.t_b = real();
        else if (key == "tau_a") cfg.tau_a = real();
        else if (key == "tau_b") cfg.tau_b = real();
        else if (key == "ga_ta") cfg.ga_ta = real();
        else if (key == "gb_tb") cfg.gb_tb = real();
        else if (key == "k_max") cfg.k_max = static_cast<int>(integer());
        else if (key == "point_x") cfg.point_x = real();
        else if (key == "point_root") cfg.point_root = static_cast<int>(integer());
        else if (key == "point_branch") cfg.point_branch = val;
        else if (key == "y_max") cfg.y_max = real();
        else if (key == "protocol") cfg.protocol = val;
        else if (key == "initial_state") cfg.initial_state = val;
        else if (key == "prep_reps") cfg.prep_reps = static_cast<int>(integer());
        else if (key == "n_iterations") cfg.n_iterations = integer();
        else if (key == "output") cfg.output = val;
        else if (key == "seed") cfg.seed = detail::parse_number<unsigned long long>(val, line, key);
        else if (key == "x_grid") cfg.x_grid = detail::parse_list(val, line, key);
        else throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    if (cfg.model != "qubit" && cfg.model != "cavity") throw ConfigError("model must be 'qubit' or 'cavity'");
    if (cfg.point_branch != "primary" && cfg.point_branch != "shifted") throw ConfigError("point_branch must be 'primary' or 'shifted'");
    if (cfg.n_iterations < 0) throw ConfigError("n_iterations must be >= 0");
    if (cfg.prep_reps < 0) throw ConfigError("prep_reps must be >= 0");
    if (cfg.point_root < 0) throw ConfigError("point_root must be >= 0");
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace zdistill
