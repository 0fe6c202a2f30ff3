#pragma once

// Flat key=value run configuration.
//
// Grammar, one entry per line:
//   key = value          # trailing comments allowed
// Blank lines and lines starting with '#' are skipped. List-valued keys take
// comma-separated entries. Unknown keys are an error (with the line number),
// so a typo cannot silently fall back to a default.
//
// Keys and defaults:
//   problems    = deriv2,phillips,gravity,heat
//   dims        = 128,512,2048
//   snrs        = 0.01,0.1,1,10,100,1000
//   laws        = gaussian,pareto        (also: three_point)
//   runs        = 100
//   tau         = 1.5
//   seed        = 0
//   noise_basis = spectral               (or: coordinate)
//   threads     = 1
//   out_dir     = .
//   formats     = csv,json               (also: md)

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hdp/bench.hpp"
#include "hdp/noise.hpp"

namespace hdp {

struct Config {
    std::vector<std::string> problems = problem_names();
    std::vector<std::size_t> dims = {128, 512, 2048};
    Vector snrs = {1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3};
    std::vector<NoiseLaw> laws = {NoiseLaw::gaussian, NoiseLaw::pareto};
    std::size_t runs = 100;
    double tau = 1.5;
    std::uint64_t seed = 0;
    NoiseBasis noise_basis = NoiseBasis::spectral;
    std::size_t threads = 1;
    std::string out_dir = ".";
    std::vector<std::string> formats = {"csv", "json"};
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config line " + std::to_string(line) +
                                    ": expected a number, got '" + s + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& s, std::size_t line) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument("config line " + std::to_string(line) +
                                    ": expected a nonnegative integer, got '" + s + "'");
    return v;
}

} // namespace detail

inline Config parse_config(std::istream& in) {
    Config cfg;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (value.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty value for '" + key + "'");

        if (key == "problems") {
            cfg.problems = detail::split_list(value);
            for (const auto& p : cfg.problems) {
                const auto& known = problem_names();
                if (std::find(known.begin(), known.end(), p) == known.end())
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                ": unknown problem '" + p + "'");
            }
        } else if (key == "dims") {
            cfg.dims.clear();
            for (const auto& d : detail::split_list(value))
                cfg.dims.push_back(static_cast<std::size_t>(detail::parse_u64(d, lineno)));
        } else if (key == "snrs") {
            cfg.snrs.clear();
            for (const auto& s : detail::split_list(value))
                cfg.snrs.push_back(detail::parse_double(s, lineno));
        } else if (key == "laws") {
            cfg.laws.clear();
            for (const auto& l : detail::split_list(value)) {
                try {
                    cfg.laws.push_back(noise_law_from_string(l));
                } catch (const std::invalid_argument&) {
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                ": unknown noise law '" + l + "'");
                }
            }
        } else if (key == "runs") {
            cfg.runs = static_cast<std::size_t>(detail::parse_u64(value, lineno));
        } else if (key == "tau") {
            cfg.tau = detail::parse_double(value, lineno);
        } else if (key == "seed") {
            cfg.seed = detail::parse_u64(value, lineno);
        } else if (key == "noise_basis") {
            try {
                cfg.noise_basis = noise_basis_from_string(value);
            } catch (const std::invalid_argument&) {
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": unknown noise basis '" + value + "'");
            }
        } else if (key == "threads") {
            cfg.threads = static_cast<std::size_t>(detail::parse_u64(value, lineno));
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "formats") {
            cfg.formats = detail::split_list(value);
            for (const auto& f : cfg.formats)
                if (f != "csv" && f != "json" && f != "md")
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                ": unknown format '" + f + "'");
        } else {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    return parse_config(in);
}

inline std::string save_config(const Config& cfg) {
    auto join = [](const std::vector<std::string>& items) {
        std::string out;
        for (std::size_t i = 0; i < items.size(); ++i)
            out += (i ? "," : "") + items[i];
        return out;
    };
    std::string out;
    out += "problems = " + join(cfg.problems) + "\n";
    std::vector<std::string> items;
    for (auto d : cfg.dims) items.push_back(std::to_string(d));
    out += "dims = " + join(items) + "\n";
    items.clear();
    for (auto s : cfg.snrs) items.push_back(format_shortest(s));
    out += "snrs = " + join(items) + "\n";
    items.clear();
    for (auto l : cfg.laws) items.push_back(to_string(l));
    out += "laws = " + join(items) + "\n";
    out += "runs = " + std::to_string(cfg.runs) + "\n";
    out += "tau = " + format_shortest(cfg.tau) + "\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    out += "noise_basis = " + to_string(cfg.noise_basis) + "\n";
    out += "threads = " + std::to_string(cfg.threads) + "\n";
    out += "out_dir = " + cfg.out_dir + "\n";
    out += "formats = " + join(cfg.formats) + "\n";
    return out;
}

inline GridSpec grid_from_config(const Config& cfg) {
    GridSpec grid;
    grid.problems = cfg.problems;
    grid.dims = cfg.dims;
    grid.snrs = cfg.snrs;
    grid.laws = cfg.laws;
    grid.runs = cfg.runs;
    grid.tau = cfg.tau;
    grid.master_seed = cfg.seed;
    grid.basis = cfg.noise_basis;
    grid.threads = cfg.threads;
    return grid;
}

} // namespace hdp
