// Command line driver.
//
// Subcommands:
//   bench                 full benchmark grid (flags/config file, see --help)
//   cell                  one (problem, law, D, snr) cell
//   problem dump          write kernel, solution, data and spectrum as CSV
//   theory constants      explicit constants of the sequence-model bound
//   theory concentration  Monte Carlo check of the residual concentration
//   theory counterexample adversarial construction report
//   theory bayes          rate study over a delta grid
//   version               print name and version
//
// Exit codes: 0 success, 1 invalid arguments or config, 2 numerical failure.
//
// Report files are named {subcommand}-{seed}-{confighash}.{ext}; the default
// output directory is $HDPBENCH_OUT_DIR, falling back to the working
// directory. Reports contain no wall-clock content unless --stamp is given,
// so identical invocations produce byte-identical files.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hdp/bench.hpp"
#include "hdp/config.hpp"
#include "hdp/report_json.hpp"
#include "hdp/theory.hpp"
#include "hdp/version.hpp"

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("HDPBENCH_OUT_DIR");
    return (env && *env) ? env : ".";
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out << content;
}

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct BenchFlags {
    std::string config_path;
    std::vector<std::string> problems;
    std::vector<std::size_t> dims;
    std::vector<double> snrs;
    std::vector<std::string> laws;
    std::size_t runs = 0;
    double tau = 0.0;
    std::uint64_t seed = 0;
    std::string basis;
    std::size_t threads = 0;
    std::string out_dir;
    std::vector<std::string> formats;
    bool stamp = false;
};

// flags beat config file values, config file values beat defaults
hdp::Config effective_config(const BenchFlags& f, const CLI::App* cmd) {
    hdp::Config cfg = f.config_path.empty() ? hdp::Config{} : hdp::load_config(f.config_path);
    if (cmd->count("--problem")) cfg.problems = f.problems;
    if (cmd->count("--dim")) cfg.dims = f.dims;
    if (cmd->count("--snr")) cfg.snrs = f.snrs;
    if (cmd->count("--noise")) {
        cfg.laws.clear();
        for (const auto& l : f.laws) cfg.laws.push_back(hdp::noise_law_from_string(l));
    }
    if (cmd->count("--runs")) cfg.runs = f.runs;
    if (cmd->count("--tau")) cfg.tau = f.tau;
    if (cmd->count("--seed")) cfg.seed = f.seed;
    if (cmd->count("--basis")) cfg.noise_basis = hdp::noise_basis_from_string(f.basis);
    if (cmd->count("--threads")) cfg.threads = f.threads;
    if (cmd->count("--out")) cfg.out_dir = f.out_dir;
    if (cmd->count("--format")) cfg.formats = f.formats;
    return cfg;
}

void add_bench_flags(CLI::App* cmd, BenchFlags& f, bool grid) {
    if (grid) {
        cmd->add_option("--config", f.config_path, "key = value config file");
        cmd->add_option("--problem", f.problems, "problems to run")->delimiter(',');
        cmd->add_option("--dim", f.dims, "dimensions")->delimiter(',');
        cmd->add_option("--snr", f.snrs, "signal-to-noise ratios")->delimiter(',');
        cmd->add_option("--noise", f.laws, "noise laws: gaussian, pareto, three_point")
            ->delimiter(',');
    }
    cmd->add_option("--runs", f.runs, "independent noise draws per cell");
    cmd->add_option("--tau", f.tau, "discrepancy principle constant");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--basis", f.basis, "noise basis: spectral or coordinate");
    cmd->add_option("--threads", f.threads, "worker threads (results are thread-count invariant)");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--format", f.formats, "outputs: csv, json, md")->delimiter(',');
    cmd->add_flag("--stamp", f.stamp, "embed a wall-clock timestamp (breaks byte reproducibility)");
}

int write_report(const hdp::BenchReport& report, const hdp::Config& cfg,
                 const std::string& subcommand) {
    const std::string dir = cfg.out_dir.empty() ? default_out_dir() : cfg.out_dir;
    std::filesystem::create_directories(dir);
    const std::string stem = subcommand + "-" + std::to_string(cfg.seed) + "-" +
                             hex64(hdp::fnv1a64(hdp::save_config(cfg)));
    for (const auto& fmt : cfg.formats) {
        const std::string path = dir + "/" + stem + "." + fmt;
        if (fmt == "csv") write_file(path, hdp::to_csv(report));
        else if (fmt == "json") write_file(path, hdp::to_json(report));
        else if (fmt == "md") write_file(path, hdp::to_markdown(report));
        else throw std::invalid_argument("unknown format '" + fmt + "'");
        std::cout << path << "\n";
    }
    return 0;
}

std::string csv_of_matrix(const hdp::Matrix& m) {
    std::string out;
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (c) out += ",";
            out += hdp::format_shortest(m(r, c));
        }
        out += "\n";
    }
    return out;
}

std::string csv_of_vector(const hdp::Vector& v) {
    std::string out;
    for (double x : v) out += hdp::format_shortest(x) + "\n";
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(hdp::kProjectName) +
                 ": spectral cut-off regularization with heuristic and exact "
                 "discrepancy rules"};
    app.require_subcommand(1);

    // ----- bench ------------------------------------------------------------
    BenchFlags bench_flags;
    CLI::App* bench_cmd = app.add_subcommand("bench", "run a benchmark grid");
    add_bench_flags(bench_cmd, bench_flags, true);

    // ----- cell -------------------------------------------------------------
    BenchFlags cell_flags;
    std::string cell_problem, cell_law = "gaussian";
    std::size_t cell_dim = 0;
    double cell_snr = 0.0;
    CLI::App* cell_cmd = app.add_subcommand("cell", "run a single benchmark cell");
    cell_cmd->add_option("--problem", cell_problem, "problem name")->required();
    cell_cmd->add_option("--dim", cell_dim, "dimension")->required();
    cell_cmd->add_option("--snr", cell_snr, "signal-to-noise ratio")->required();
    cell_cmd->add_option("--noise", cell_law, "noise law");
    add_bench_flags(cell_cmd, cell_flags, false);

    // ----- problem dump -------------------------------------------------------
    CLI::App* problem_cmd = app.add_subcommand("problem", "test problem utilities");
    problem_cmd->require_subcommand(1);
    CLI::App* dump_cmd = problem_cmd->add_subcommand(
        "dump", "write kernel, solution, data and singular values as CSV");
    std::string dump_name, dump_out;
    std::size_t dump_dim = 0;
    dump_cmd->add_option("--name", dump_name, "problem name")->required();
    dump_cmd->add_option("--dim", dump_dim, "dimension")->required();
    dump_cmd->add_option("--out", dump_out, "output directory");

    // ----- theory -------------------------------------------------------------
    CLI::App* theory_cmd = app.add_subcommand("theory", "quantitative checks of the analysis");
    theory_cmd->require_subcommand(1);

    double th_q = 2.0, th_eta = 2.0;
    std::string th_out;
    CLI::App* constants_cmd = theory_cmd->add_subcommand(
        "constants", "explicit constants of the oracle inequality");
    constants_cmd->add_option("--q", th_q, "spectral decay exponent");
    constants_cmd->add_option("--eta", th_eta, "solution decay exponent");
    constants_cmd->add_option("--out", th_out, "also write the JSON here");

    std::vector<std::size_t> conc_kappas = {16, 64, 256};
    double conc_eps = 0.5;
    std::string conc_law = "gaussian";
    std::size_t conc_trials = 2000, conc_factor = 8;
    std::uint64_t conc_seed = 0;
    CLI::App* conc_cmd = theory_cmd->add_subcommand(
        "concentration", "frequency of the simultaneous residual concentration event");
    conc_cmd->add_option("--kappa", conc_kappas, "smallest window sizes")->delimiter(',');
    conc_cmd->add_option("--eps-prime", conc_eps, "relative deviation");
    conc_cmd->add_option("--law", conc_law, "noise law");
    conc_cmd->add_option("--trials", conc_trials, "Monte Carlo trials per kappa");
    conc_cmd->add_option("--dim-factor", conc_factor, "dimension = factor * kappa");
    conc_cmd->add_option("--seed", conc_seed, "seed");
    conc_cmd->add_option("--out", th_out, "also write the JSON here");

    double ce_delta = 1e-3;
    CLI::App* ce_cmd = theory_cmd->add_subcommand(
        "counterexample", "adversarial observation that defeats the heuristic rule");
    ce_cmd->add_option("--delta", ce_delta, "noise level in (0,1)");
    ce_cmd->add_option("--out", th_out, "also write the JSON here");

    double by_q = 2.0, by_eta = 2.0, by_dmin = 1e-5, by_dmax = 1e-2;
    std::size_t by_points = 5, by_runs = 50;
    std::uint64_t by_seed = 0;
    std::string by_mode = "deterministic";
    CLI::App* bayes_cmd = theory_cmd->add_subcommand(
        "bayes", "error decay of the heuristic rule over a delta grid");
    bayes_cmd->add_option("--q", by_q, "spectral decay exponent");
    bayes_cmd->add_option("--eta", by_eta, "solution decay exponent");
    bayes_cmd->add_option("--mode", by_mode, "coefficient mode: deterministic or gaussian");
    bayes_cmd->add_option("--delta-min", by_dmin, "smallest delta");
    bayes_cmd->add_option("--delta-max", by_dmax, "largest delta");
    bayes_cmd->add_option("--points", by_points, "log-spaced grid size");
    bayes_cmd->add_option("--runs", by_runs, "runs per delta");
    bayes_cmd->add_option("--seed", by_seed, "seed");
    bayes_cmd->add_option("--out", th_out, "also write the JSON here");

    // ----- version ------------------------------------------------------------
    app.add_subcommand("version", "print name and version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand("version")) {
            std::cout << hdp::kProjectName << " " << hdp::kVersion << "\n";
            return 0;
        }

        if (app.got_subcommand(bench_cmd)) {
            hdp::Config cfg = effective_config(bench_flags, bench_cmd);
            if (cfg.out_dir == ".") cfg.out_dir = bench_cmd->count("--out") ? cfg.out_dir
                                                                            : default_out_dir();
            hdp::BenchReport report = hdp::run_grid(hdp::grid_from_config(cfg));
            if (bench_flags.stamp) report.timestamp = iso_now();
            return write_report(report, cfg, "bench");
        }

        if (app.got_subcommand(cell_cmd)) {
            hdp::Config cfg = effective_config(cell_flags, cell_cmd);
            if (cfg.out_dir == ".") cfg.out_dir = cell_cmd->count("--out") ? cfg.out_dir
                                                                           : default_out_dir();
            cfg.problems = {cell_problem};
            cfg.dims = {cell_dim};
            cfg.snrs = {cell_snr};
            cfg.laws = {hdp::noise_law_from_string(cell_law)};
            hdp::BenchReport report = hdp::run_grid(hdp::grid_from_config(cfg));
            if (cell_flags.stamp) report.timestamp = iso_now();
            std::cout << hdp::to_csv(report);
            return write_report(report, cfg, "cell");
        }

        if (app.got_subcommand(problem_cmd)) {
            const hdp::InverseProblem p = hdp::generate_problem(dump_name, dump_dim);
            const std::string dir = dump_out.empty() ? default_out_dir() : dump_out;
            std::filesystem::create_directories(dir);
            const std::string stem =
                dir + "/problem-" + p.name + "-" + std::to_string(p.dim);
            write_file(stem + "-kernel.csv", csv_of_matrix(p.kernel));
            write_file(stem + "-x.csv", csv_of_vector(p.x_true));
            write_file(stem + "-y.csv", csv_of_vector(p.y_true));
            write_file(stem + "-sigma.csv", csv_of_vector(p.system.sigmas));
            std::cout << stem << "-{kernel,x,y,sigma}.csv\n";
            return 0;
        }

        std::string json;
        std::string stem;
        if (theory_cmd->got_subcommand(constants_cmd)) {
            json = hdp::to_json(hdp::compute_constants(th_q, th_eta));
            stem = "theory-constants";
        } else if (theory_cmd->got_subcommand(conc_cmd)) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const std::size_t kappa : conc_kappas) {
                const std::size_t dim = conc_factor * kappa;
                const double freq = hdp::residual_concentration(
                    kappa, conc_eps, hdp::noise_law_from_string(conc_law), conc_trials, dim,
                    conc_seed);
                nlohmann::ordered_json row;
                row["kappa"] = kappa;
                row["dim"] = dim;
                row["eps_prime"] = conc_eps;
                row["law"] = conc_law;
                row["trials"] = conc_trials;
                row["frequency"] = freq;
                arr.push_back(row);
            }
            json = arr.dump(2) + "\n";
            stem = "theory-concentration-" + std::to_string(conc_seed);
        } else if (theory_cmd->got_subcommand(ce_cmd)) {
            json = hdp::to_json(hdp::counterexample_check(ce_delta));
            stem = "theory-counterexample";
        } else {
            const hdp::CoeffMode mode =
                by_mode == "gaussian" ? hdp::CoeffMode::gaussian
                : by_mode == "deterministic"
                    ? hdp::CoeffMode::deterministic
                    : throw std::invalid_argument("unknown mode '" + by_mode + "'");
            if (by_points < 2) throw std::invalid_argument("need at least 2 grid points");
            hdp::Vector deltas(by_points);
            const double lmin = std::log(by_dmin), lmax = std::log(by_dmax);
            for (std::size_t i = 0; i < by_points; ++i)
                deltas[i] = std::exp(lmin + (lmax - lmin) * static_cast<double>(i) /
                                                static_cast<double>(by_points - 1));
            json = hdp::to_json(hdp::bayes_rate_study(by_q, by_eta, mode, deltas, by_runs,
                                                      by_seed));
            stem = "theory-bayes-" + std::to_string(by_seed);
        }
        std::cout << json;
        if (!th_out.empty()) {
            std::filesystem::create_directories(th_out);
            const std::string path =
                th_out + "/" + stem + "-" + hex64(hdp::fnv1a64(json)) + ".json";
            write_file(path, json);
            std::cerr << path << "\n";
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const hdp::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << " (residual " << e.residual() << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
