#pragma once

// JSON views of the report types. Kept apart from bench.hpp so the core
// headers do not drag the json dependency into every translation unit.

#include <json.hpp>

#include "hdp/bench.hpp"
#include "hdp/theory.hpp"
#include "hdp/version.hpp"

namespace hdp {

// Discretization identity of each operator, recorded so that numbers can be
// traced to the exact formulas that produced them.
inline const std::map<std::string, std::string>& kernel_fingerprints() {
    static const std::map<std::string, std::string> fp = {
        {"deriv2",
         "midpoint collocation on [0,1], k(s,t) = s(t-1) for s<t else t(s-1), x(t) = t"},
        {"phillips",
         "midpoint collocation on [-6,6], k(s,t) = phi(s-t) with "
         "phi(u) = 1 + cos(pi u/3) on |u|<3, x = phi"},
        {"gravity",
         "midpoint collocation on [0,1], depth 0.25, k(s,t) = d (d^2+(s-t)^2)^{-3/2}, "
         "x(t) = sin(pi t) + 0.5 sin(2 pi t)"},
        {"heat",
         "Volterra collocation on [0,1], s_i = i h, k(u) = u^{-3/2}/(2 sqrt(pi)) "
         "exp(-1/(4u)), x piecewise ramp/hump/decay on 20t, zero on [1/2,1]"},
    };
    return fp;
}

inline nlohmann::ordered_json metadata_json(const BenchReport& report) {
    nlohmann::ordered_json meta;
    meta["tool"] = kProjectName;
    meta["version"] = kVersion;
    meta["seed"] = report.master_seed;
    meta["noise_basis"] = to_string(report.basis);
    meta["tau"] = report.tau;
    meta["runs"] = report.runs;
    meta["hd_m_scan"] = "full";
    nlohmann::ordered_json fps;
    for (const auto& [name, fp] : kernel_fingerprints()) fps[name] = fp;
    meta["kernel_fingerprints"] = fps;
    if (!report.timestamp.empty()) meta["timestamp"] = report.timestamp;
    return meta;
}

inline std::string to_json(const BenchReport& report) {
    nlohmann::ordered_json j;
    j["metadata"] = metadata_json(report);
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& cell : report.cells) {
        nlohmann::ordered_json c;
        c["problem"] = cell.spec.problem;
        c["law"] = to_string(cell.spec.law);
        c["D"] = cell.spec.dim;
        c["snr"] = cell.spec.snr;
        c["runs"] = cell.result.runs_completed;
        c["e_hd"] = cell.result.e_hd;
        c["e_dp"] = cell.result.e_dp;
        c["e_opt"] = cell.result.e_opt;
        c["med_hd"] = cell.result.med_hd;
        c["med_dp"] = cell.result.med_dp;
        c["med_opt"] = cell.result.med_opt;
        c["k_hd_mean"] = cell.result.k_hd_mean;
        c["k_dp_mean"] = cell.result.k_dp_mean;
        c["k_opt_mean"] = cell.result.k_opt_mean;
        cells.push_back(c);
    }
    j["cells"] = cells;
    return j.dump(2) + "\n";
}

inline std::string to_json(const RateConstants& rc) {
    nlohmann::ordered_json j;
    j["q"] = rc.q;
    j["eta"] = rc.eta;
    j["epsilon"] = rc.epsilon;
    j["epsilon_prime"] = rc.epsilon_prime;
    j["c_small"] = rc.c_small;
    j["c_menu"] = rc.c_menu;
    j["c_final"] = rc.c_final;
    j["p_final"] = rc.p_final;
    j["rate_exponent"] = rc.rate_exponent;
    j["probability_exponent"] = rc.probability_exponent;
    return j.dump(2) + "\n";
}

inline std::string to_json(const CounterexampleReport& rep) {
    nlohmann::ordered_json j;
    j["delta"] = rep.delta;
    j["m_delta"] = rep.m_delta;
    j["dim"] = rep.dim;
    j["psi_at_construction"] = rep.psi_at_construction;
    j["hd_argmin_at_2m"] = rep.hd_argmin_at_2m;
    j["k_hd"] = rep.k_hd;
    j["log_error"] = rep.log_error;
    j["log_error_bound"] = rep.log_error_bound;
    j["log_mise_bound"] = rep.log_mise_bound;
    j["log_mise_floor"] = rep.log_mise_floor;
    j["argmin_pinned"] = rep.argmin_pinned;
    j["selection_beyond"] = rep.selection_beyond;
    j["error_explodes"] = rep.error_explodes;
    j["mise_diverges"] = rep.mise_diverges;
    return j.dump(2) + "\n";
}

inline std::string to_json(const ChiSquareTailReport& rep) {
    nlohmann::ordered_json j;
    j["empirical_freq"] = rep.empirical_freq;
    j["bound"] = rep.bound;
    j["holds"] = rep.empirical_freq <= rep.bound;
    return j.dump(2) + "\n";
}

inline std::string to_json(const BayesRateReport& rep) {
    nlohmann::ordered_json j;
    j["q"] = rep.constants.q;
    j["eta"] = rep.constants.eta;
    j["mode"] = rep.mode == CoeffMode::gaussian ? "gaussian" : "deterministic";
    j["runs"] = rep.runs;
    j["c_final"] = rep.constants.c_final;
    j["rate_exponent"] = rep.constants.rate_exponent;
    j["fitted_slope"] = rep.fitted_slope;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& pt : rep.points) {
        nlohmann::ordered_json p;
        p["delta"] = pt.delta;
        p["k_delta"] = pt.k_delta;
        p["dim"] = pt.dim;
        p["mean_err_hd"] = pt.mean_err_hd;
        p["mean_err_opt"] = pt.mean_err_opt;
        p["oracle_ineq_freq"] = pt.oracle_ineq_freq;
        pts.push_back(p);
    }
    j["points"] = pts;
    return j.dump(2) + "\n";
}

} // namespace hdp
