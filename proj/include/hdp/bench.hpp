#pragma once

// Benchmark harness: runs the three rules over a grid of
// (problem, noise law, dimension, snr) cells and serializes the aggregates.
//
// Reproducibility contract: every run r of a cell draws its noise from the
// stream substream_seed(master_seed, cell_id, r), where cell_id is a hash of
// the cell coordinates. Results are therefore independent of execution order
// and of the number of worker threads, and serialized reports are
// byte-identical across reruns.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hdp/estimator.hpp"
#include "hdp/noise.hpp"
#include "hdp/problems.hpp"
#include "hdp/rng.hpp"
#include "hdp/rules.hpp"
#include "hdp/version.hpp"

namespace hdp {

struct CellSpec {
    std::string problem;
    std::size_t dim = 0;
    double snr = 1.0;
    NoiseLaw law = NoiseLaw::gaussian;
    std::size_t runs = 100;
    double tau = 1.5;
    std::uint64_t master_seed = 0;
    NoiseBasis basis = NoiseBasis::spectral;
    // test hook: bypass the snr -> delta conversion (0 = exact data)
    std::optional<double> forced_delta;
};

struct CellResult {
    double e_hd = 0.0, e_dp = 0.0, e_opt = 0.0;          // means of per-run relative errors
    double med_hd = 0.0, med_dp = 0.0, med_opt = 0.0;    // medians of the same
    double k_hd_mean = 0.0, k_dp_mean = 0.0, k_opt_mean = 0.0;
    std::size_t runs_completed = 0;
};

struct BenchCell {
    CellSpec spec;
    CellResult result;
};

struct BenchReport {
    std::vector<BenchCell> cells;
    std::uint64_t master_seed = 0;
    NoiseBasis basis = NoiseBasis::spectral;
    double tau = 1.5;
    std::size_t runs = 0;
    std::string timestamp;  // empty unless explicitly stamped
};

// Deterministic 6-significant-digit decimal rendering, locale independent.
inline std::string format_g6(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

inline std::string format_shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Stable identity of a cell; excludes the run count so adding runs extends
// the substream family instead of reshuffling it.
inline std::string cell_key(const CellSpec& spec) {
    return spec.problem + "|" + std::to_string(spec.dim) + "|" + format_shortest(spec.snr) +
           "|" + to_string(spec.law) + "|" + to_string(spec.basis) + "|" +
           format_shortest(spec.tau);
}

inline std::uint64_t cell_id(const CellSpec& spec) { return fnv1a64(cell_key(spec)); }

namespace detail {

struct RunRecord {
    double rel_hd = 0.0, rel_dp = 0.0, rel_opt = 0.0;
    std::size_t k_hd = 0, k_dp = 0, k_opt = 0;
    bool ok = false;
};

inline double median_of(Vector v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    // even count: mean of the two middle order statistics
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

inline CellResult run_cell(const CellSpec& spec, const InverseProblem& problem,
                           std::size_t threads = 1) {
    if (problem.name != spec.problem || problem.dim != spec.dim)
        throw std::invalid_argument("run_cell: problem does not match the cell spec");
    if (spec.runs < 1) throw std::invalid_argument("run_cell: need runs >= 1");

    const double delta = spec.forced_delta
                             ? *spec.forced_delta
                             : delta_from_snr(two_norm(problem.y_true), spec.dim, spec.snr);
    const std::size_t rank = problem.system.numerical_rank;
    const Vector& sigmas = problem.system.sigmas;
    const double x_norm = two_norm(problem.x_true_spectral);
    const std::uint64_t cid = cell_id(spec);

    std::vector<detail::RunRecord> records(spec.runs);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            detail::RunRecord rec;
            try {
                NoiseSpec nspec{spec.law, spec.basis, substream_seed(spec.master_seed, cid, r)};
                const SpectralObservation obs = observe(problem, delta, nspec);
                const ErrorProfile prof = squared_error_profile(
                    obs.coeffs, sigmas, problem.x_true_spectral, rank);

                rec.k_hd = hd(obs.coeffs, sigmas, rank).k_selected;
                rec.k_dp = dp(obs.coeffs, spec.tau, delta).k_selected;
                double best = prof.total[0];
                std::size_t k_opt = 0;
                for (std::size_t k = 1; k <= rank; ++k) {
                    if (prof.total[k] < best) {
                        best = prof.total[k];
                        k_opt = k;
                    }
                }
                rec.k_opt = k_opt;

                // the estimator is defined up to the rank; dp may point past it
                const std::size_t k_dp_eff = std::min(rec.k_dp, rank);
                rec.rel_hd = std::sqrt(prof.total[rec.k_hd]) / x_norm;
                rec.rel_dp = std::sqrt(prof.total[k_dp_eff]) / x_norm;
                rec.rel_opt = std::sqrt(best) / x_norm;
                rec.ok = true;
            } catch (const std::exception&) {
                rec.ok = false;
            }
            records[r] = rec;
        }
    };

    if (threads <= 1 || spec.runs == 1) {
        work(0, spec.runs);
    } else {
        const std::size_t nthreads = std::min<std::size_t>(threads, spec.runs);
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        const std::size_t chunk = (spec.runs + nthreads - 1) / nthreads;
        for (std::size_t t = 0; t < nthreads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(spec.runs, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    CellResult res;
    Vector hs, ds, os;
    hs.reserve(spec.runs);
    ds.reserve(spec.runs);
    os.reserve(spec.runs);
    for (const auto& rec : records) {
        if (!rec.ok) continue;
        ++res.runs_completed;
        res.e_hd += rec.rel_hd;
        res.e_dp += rec.rel_dp;
        res.e_opt += rec.rel_opt;
        res.k_hd_mean += static_cast<double>(rec.k_hd);
        res.k_dp_mean += static_cast<double>(rec.k_dp);
        res.k_opt_mean += static_cast<double>(rec.k_opt);
        hs.push_back(rec.rel_hd);
        ds.push_back(rec.rel_dp);
        os.push_back(rec.rel_opt);
    }
    if (res.runs_completed > 0) {
        const double n = static_cast<double>(res.runs_completed);
        res.e_hd /= n;
        res.e_dp /= n;
        res.e_opt /= n;
        res.k_hd_mean /= n;
        res.k_dp_mean /= n;
        res.k_opt_mean /= n;
        res.med_hd = detail::median_of(hs);
        res.med_dp = detail::median_of(ds);
        res.med_opt = detail::median_of(os);
    }
    return res;
}

inline CellResult run_cell(const CellSpec& spec, std::size_t threads = 1) {
    const InverseProblem problem = generate_problem(spec.problem, spec.dim);
    return run_cell(spec, problem, threads);
}

struct GridSpec {
    std::vector<std::string> problems = problem_names();
    std::vector<std::size_t> dims = {128, 512, 2048};
    Vector snrs = {1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3};
    std::vector<NoiseLaw> laws = {NoiseLaw::gaussian, NoiseLaw::pareto};
    std::size_t runs = 100;
    double tau = 1.5;
    std::uint64_t master_seed = 0;
    NoiseBasis basis = NoiseBasis::spectral;
    std::size_t threads = 1;
};

// Report order: problem, then law, then dimension, then snr.
inline std::vector<CellSpec> enumerate_cells(const GridSpec& grid) {
    std::vector<CellSpec> cells;
    cells.reserve(grid.problems.size() * grid.laws.size() * grid.dims.size() * grid.snrs.size());
    for (const auto& name : grid.problems)
        for (const auto law : grid.laws)
            for (const auto dim : grid.dims)
                for (const double snr : grid.snrs) {
                    CellSpec spec;
                    spec.problem = name;
                    spec.dim = dim;
                    spec.snr = snr;
                    spec.law = law;
                    spec.runs = grid.runs;
                    spec.tau = grid.tau;
                    spec.master_seed = grid.master_seed;
                    spec.basis = grid.basis;
                    cells.push_back(spec);
                }
    return cells;
}

inline BenchReport run_grid(const GridSpec& grid) {
    const std::vector<CellSpec> cells = enumerate_cells(grid);
    BenchReport report;
    report.cells.resize(cells.size());
    report.master_seed = grid.master_seed;
    report.basis = grid.basis;
    report.tau = grid.tau;
    report.runs = grid.runs;

    // execute grouped by (problem, dim) so each SVD is computed exactly once
    // and at most one factorization is resident
    for (const auto& name : grid.problems) {
        for (const auto dim : grid.dims) {
            const InverseProblem problem = generate_problem(name, dim);
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i].problem != name || cells[i].dim != dim) continue;
                report.cells[i] = BenchCell{cells[i], run_cell(cells[i], problem, grid.threads)};
            }
        }
    }
    return report;
}

// ----- serialization --------------------------------------------------------

inline std::string to_csv(const BenchReport& report) {
    std::string out =
        "problem,law,D,snr,runs,e_hd,e_dp,e_opt,med_hd,med_dp,med_opt,"
        "k_hd_mean,k_dp_mean,k_opt_mean\n";
    for (const auto& cell : report.cells) {
        const auto& s = cell.spec;
        const auto& r = cell.result;
        out += s.problem + "," + to_string(s.law) + "," + std::to_string(s.dim) + "," +
               format_g6(s.snr) + "," + std::to_string(r.runs_completed) + "," +
               format_g6(r.e_hd) + "," + format_g6(r.e_dp) + "," + format_g6(r.e_opt) + "," +
               format_g6(r.med_hd) + "," + format_g6(r.med_dp) + "," + format_g6(r.med_opt) +
               "," + format_g6(r.k_hd_mean) + "," + format_g6(r.k_dp_mean) + "," +
               format_g6(r.k_opt_mean) + "\n";
    }
    return out;
}

inline std::string to_markdown(const BenchReport& report) {
    std::string out;
    out += "# Benchmark report\n\n";
    out += "- seed: " + std::to_string(report.master_seed) + "\n";
    out += "- noise basis: " + to_string(report.basis) + "\n";
    out += "- tau: " + format_shortest(report.tau) + "\n";
    out += "- runs per cell: " + std::to_string(report.runs) + "\n";
    if (!report.timestamp.empty()) out += "- generated: " + report.timestamp + "\n";

    // group cells by (problem, law), preserving report order
    std::vector<std::pair<std::string, NoiseLaw>> groups;
    for (const auto& cell : report.cells) {
        const auto key = std::make_pair(cell.spec.problem, cell.spec.law);
        if (std::find(groups.begin(), groups.end(), key) == groups.end())
            groups.push_back(key);
    }
    for (const auto& [name, law] : groups) {
        out += "\n## " + name + ", " + to_string(law) + " noise\n\n";
        out += "| D | snr | e_hd | e_dp | e_opt | med_hd | med_dp | med_opt |\n";
        out += "|---|-----|------|------|-------|--------|--------|--------|\n";
        for (const auto& cell : report.cells) {
            if (cell.spec.problem != name || cell.spec.law != law) continue;
            const auto& r = cell.result;
            out += "| " + std::to_string(cell.spec.dim) + " | " + format_g6(cell.spec.snr) +
                   " | " + format_g6(r.e_hd) + " | " + format_g6(r.e_dp) + " | " +
                   format_g6(r.e_opt) + " | " + format_g6(r.med_hd) + " | " +
                   format_g6(r.med_dp) + " | " + format_g6(r.med_opt) + " |\n";
        }
    }
    return out;
}

} // namespace hdp
