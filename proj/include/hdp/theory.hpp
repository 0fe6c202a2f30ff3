#pragma once

// Quantitative side of the analysis: the explicit constants of the
// sequence-model error bound, Monte Carlo checks of the two concentration
// statements behind it, the adversarial construction that defeats the
// heuristic rule, and the rate study over a delta grid.

#include <cmath>
#include <cstdint>
#include <limits>

#include "hdp/common.hpp"
#include "hdp/estimator.hpp"
#include "hdp/noise.hpp"
#include "hdp/problems.hpp"
#include "hdp/rng.hpp"
#include "hdp/rules.hpp"

namespace hdp {

// Constants of the high-probability oracle inequality for the sequence model
// sigma_j^2 = j^{-q}, x_j = j^{-eta/2} X_j, evaluated at epsilon = 1/4.
struct RateConstants {
    double q = 0.0;
    double eta = 0.0;
    double epsilon = 0.0;
    double epsilon_prime = 0.0;       // 1 - sqrt(1 - 3 epsilon)
    double c_small = 0.0;             // scale of the smallest admissible cutoff
    double c_menu = 0.0;              // larger of the two candidate-window constants
    double c_final = 0.0;             // constant in err_hd <= c_final * err_opt
    double p_final = 0.0;             // scale of the failure probability
    double rate_exponent = 0.0;       // error ~ delta^{(eta-1)/(eta+q)}
    double probability_exponent = 0.0;
};

inline RateConstants compute_constants(double q, double eta) {
    if (q <= 0.0) throw std::invalid_argument("compute_constants: q must be positive");
    if (eta <= 1.0) throw std::invalid_argument("compute_constants: eta must exceed 1");

    RateConstants rc;
    rc.q = q;
    rc.eta = eta;
    rc.epsilon = 0.25;
    rc.epsilon_prime = 1.0 - std::sqrt(1.0 - 3.0 * rc.epsilon);
    const double ep = rc.epsilon_prime;
    const double ratio = (1.0 + ep) / (1.0 - ep);

    rc.c_small = std::pow(std::pow(2.0, (q + eta) / 2.0) * 3.0 * std::sqrt(2.0) * ratio,
                          2.0 / (1.0 - q - eta));
    rc.c_menu = std::max(std::pow(2.0 * ratio, 2.0 / (q + eta)),
                         std::pow(4.0 * std::sqrt(3.0) * ratio, 2.0 / q));
    rc.c_final = (1.0 + ep) *
                 (std::sqrt(std::pow(rc.c_menu, 1.0 + q)) +
                  std::pow(rc.c_small, -eta / 2.0) * std::sqrt(eta / (eta - 1.0))) *
                 std::sqrt(std::max(1.0, (eta - 1.0) * std::pow(4.0, eta - 1.0)));
    rc.p_final = rc.c_small * (rc.epsilon - std::log1p(rc.epsilon)) / 2.0;
    rc.rate_exponent = (eta - 1.0) / (eta + q);
    rc.probability_exponent = 2.0 * (1.0 - eta) / ((q + eta - 1.0) * (q + eta));
    return rc;
}

// ----- concentration of normalized chi-square sums ------------------------

struct ChiSquareTailReport {
    double empirical_freq = 0.0;   // P(sup_{M <= m <= m_max} |S_m/m| >= eps), estimated
    double bound = 0.0;            // 2 exp(-(M/2)(eps - log(1+eps)))
};

// S_m = sum_{j<=m} (X_j^2 - 1) with standard normal X_j. Truncating the sup
// at m_max only shrinks the event, so empirical_freq <= bound is the
// implication being tested.
inline ChiSquareTailReport chi_square_sup_tail(std::size_t m_start, double eps,
                                               std::size_t trials, std::size_t m_max,
                                               std::uint64_t seed) {
    if (m_start < 1) throw std::invalid_argument("chi_square_sup_tail: m_start must be >= 1");
    if (eps <= 0.0) throw std::invalid_argument("chi_square_sup_tail: eps must be positive");
    if (m_max < 10 * m_start)
        throw std::invalid_argument("chi_square_sup_tail: m_max must be >= 10 m_start");
    if (trials < 1000)
        throw std::invalid_argument("chi_square_sup_tail: need at least 1000 trials");

    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        GaussianStream gs(substream_seed(seed, 0x51ULL, t));
        double s = 0.0;
        for (std::size_t m = 1; m <= m_max; ++m) {
            const double x = gs.next();
            s += x * x - 1.0;
            if (m >= m_start && std::abs(s) >= eps * static_cast<double>(m)) {
                ++hits;
                break;
            }
        }
    }
    ChiSquareTailReport rep;
    rep.empirical_freq = static_cast<double>(hits) / static_cast<double>(trials);
    rep.bound = 2.0 * std::exp(-0.5 * static_cast<double>(m_start) * (eps - std::log1p(eps)));
    return rep;
}

// Whether one realization satisfies the simultaneous residual concentration
// |sum_{j=k+1}^m (xi_j^2 - 1)| <= eps' (m - k) for all m in [kappa, D] and
// all 0 <= k <= m/2.
inline bool residual_concentration_holds(const Vector& xs, std::size_t kappa,
                                         double eps_prime) {
    const std::size_t n = xs.size();
    if (kappa < 1 || kappa > n)
        throw std::invalid_argument("residual_concentration_holds: bad kappa");
    // c[m] = sum_{j<=m} (xi_j^2 - 1); |c[m] - c[k]| <= eps' (m - k) for all
    // k <= m/2 is equivalent to c[m] - eps' m <= min_k (c[k] - eps' k) and
    // c[m] + eps' m >= max_k (c[k] + eps' k), so running prefix extrema give
    // the whole check in one pass
    Vector c(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j) c[j] = c[j - 1] + xs[j - 1] * xs[j - 1] - 1.0;

    double min_upper = 0.0;  // min over k <= m/2 of c[k] - eps' k
    double max_lower = 0.0;  // max over k <= m/2 of c[k] + eps' k
    std::size_t kp = 0;
    for (std::size_t m = 1; m <= n; ++m) {
        while (kp < m / 2) {
            ++kp;
            const double ke = eps_prime * static_cast<double>(kp);
            min_upper = std::min(min_upper, c[kp] - ke);
            max_lower = std::max(max_lower, c[kp] + ke);
        }
        if (m < kappa) continue;
        const double me = eps_prime * static_cast<double>(m);
        if (c[m] - me > min_upper) return false;
        if (c[m] + me < max_lower) return false;
    }
    return true;
}

// Empirical frequency of the event above across independent realizations.
inline double residual_concentration(std::size_t kappa, double eps_prime, NoiseLaw law,
                                     std::size_t trials, std::size_t dim,
                                     std::uint64_t seed) {
    if (dim < 4 * kappa)
        throw std::invalid_argument("residual_concentration: dim must be >= 4 kappa");
    if (trials < 1) throw std::invalid_argument("residual_concentration: need trials >= 1");
    if (eps_prime <= 0.0 || eps_prime >= 1.0)
        throw std::invalid_argument("residual_concentration: eps_prime must lie in (0,1)");

    std::size_t good = 0;
    Vector xs(dim);
    for (std::size_t t = 0; t < trials; ++t) {
        NoiseStream stream(law, substream_seed(seed, 0xc0ULL, t));
        for (auto& x : xs) x = stream.next();
        if (residual_concentration_holds(xs, kappa, eps_prime)) ++good;
    }
    return static_cast<double>(good) / static_cast<double>(trials);
}

// ----- adversarial construction -------------------------------------------

// Window size at which a sqrt(2) delta spike hides from the heuristic rule
// while inflating the reconstruction without bound as delta -> 0.
inline std::size_t m_delta_for(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("m_delta_for: delta must lie in (0,1)");
    const double raw = -3.0 * std::log(delta) / (1.0 - std::log(2.0));
    return static_cast<std::size_t>(std::ceil(raw)) + 1;
}

struct CounterexampleReport {
    double delta = 0.0;
    std::size_t m_delta = 0;
    std::size_t dim = 0;               // 2 m_delta
    double psi_at_construction = 0.0;  // Psi_{2 m_delta}(m_delta), exactly zero
    std::size_t hd_argmin_at_2m = 0;
    std::size_t k_hd = 0;
    double log_error = 0.0;            // ln ||x_{k_hd}||, the truth being zero
    double log_error_bound = 0.0;      // ln(sqrt(2) delta) + (m_delta - 1)/2
    double log_mise_bound = 0.0;       // ln(delta^2/4) + (m_delta - 1)(1 - ln 2)
    double log_mise_floor = 0.0;       // ln(1/(4 delta))
    bool argmin_pinned = false;        // Psi vanishes and the window argmin is m_delta
    bool selection_beyond = false;     // k_hd >= m_delta
    bool error_explodes = false;       // spike kept and log_error >= log_error_bound
    bool mise_diverges = false;        // log_mise_bound >= log_mise_floor
};

// sigma_j^2 = e^{-j}, x = 0, observation = adversarial spike. All
// exponentials are handled through their logarithms: log sigma_j = -j/2 is
// exact by construction, so the assertions stay meaningful for any delta.
inline CounterexampleReport counterexample_check(double delta) {
    CounterexampleReport rep;
    rep.delta = delta;
    rep.m_delta = m_delta_for(delta);
    rep.dim = 2 * rep.m_delta;

    Vector sigmas(rep.dim);
    for (std::size_t j = 0; j < rep.dim; ++j)
        sigmas[j] = std::exp(-0.5 * static_cast<double>(j + 1));
    const SpectralObservation obs = adversarial_observation(rep.m_delta, delta, rep.dim);

    rep.psi_at_construction = psi(rep.m_delta, rep.dim, obs.coeffs, sigmas, rep.dim);
    rep.hd_argmin_at_2m = hd_for_m(rep.dim, obs.coeffs, sigmas, rep.dim);
    rep.k_hd = hd(obs.coeffs, sigmas, rep.dim).k_selected;

    const double md = static_cast<double>(rep.m_delta);
    const bool spike_kept = rep.k_hd >= rep.m_delta - 1;
    if (spike_kept) {
        // only nonzero coefficient: b/sigma at position m_delta - 1, and
        // log sigma_{m_delta-1} = -(m_delta - 1)/2 exactly
        rep.log_error = std::log(std::sqrt(2.0) * delta) + (md - 1.0) / 2.0;
    } else {
        rep.log_error = -std::numeric_limits<double>::infinity();
    }
    rep.log_error_bound = std::log(std::sqrt(2.0) * delta) + (md - 1.0) / 2.0;
    rep.log_mise_bound = std::log(delta * delta / 4.0) + (md - 1.0) * (1.0 - std::log(2.0));
    rep.log_mise_floor = -std::log(4.0 * delta);

    rep.argmin_pinned = (rep.psi_at_construction == 0.0) && (rep.hd_argmin_at_2m == rep.m_delta);
    rep.selection_beyond = rep.k_hd >= rep.m_delta;
    rep.error_explodes = spike_kept && rep.log_error >= rep.log_error_bound;
    rep.mise_diverges = rep.log_mise_bound >= rep.log_mise_floor;
    return rep;
}

// ----- rate study ----------------------------------------------------------

struct BayesRatePoint {
    double delta = 0.0;
    std::size_t k_delta = 0;        // ceil(delta^{-2/(q+eta)})
    std::size_t dim = 0;
    double mean_err_hd = 0.0;       // absolute spectral errors
    double mean_err_opt = 0.0;
    double oracle_ineq_freq = 0.0;  // fraction of runs with err_hd <= c_final err_opt
};

struct BayesRateReport {
    RateConstants constants;
    CoeffMode mode = CoeffMode::deterministic;
    std::size_t runs = 0;
    std::vector<BayesRatePoint> points;
    double fitted_slope = 0.0;      // of ln mean_err_hd against ln delta
};

inline BayesRateReport bayes_rate_study(double q, double eta, CoeffMode mode,
                                        const Vector& deltas, std::size_t runs,
                                        std::uint64_t seed) {
    if (deltas.empty()) throw std::invalid_argument("bayes_rate_study: empty delta grid");
    if (runs < 1) throw std::invalid_argument("bayes_rate_study: need runs >= 1");

    BayesRateReport rep;
    rep.constants = compute_constants(q, eta);
    rep.mode = mode;
    rep.runs = runs;

    constexpr std::size_t dim_cap = 100000;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const double delta = deltas[i];
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("bayes_rate_study: deltas must lie in (0,1)");

        BayesRatePoint pt;
        pt.delta = delta;
        pt.k_delta = static_cast<std::size_t>(std::ceil(std::pow(delta, -2.0 / (q + eta))));
        std::size_t dim = 32 * pt.k_delta;
        if (dim > dim_cap) {
            if (4 * pt.k_delta > dim_cap)
                throw std::invalid_argument("bayes_rate_study: delta too small for the dimension cap");
            dim = dim_cap;
        }
        if (dim % 2 != 0) ++dim;
        pt.dim = dim;

        double sum_hd = 0.0, sum_opt = 0.0;
        std::size_t ineq = 0;
        for (std::size_t r = 0; r < runs; ++r) {
            const SequenceModel model =
                generate_sequence(dim, q, eta, mode, substream_seed(seed, 2 * i + 1, r));
            const SpectralObservation obs = observe_sequence(
                model, delta, NoiseLaw::gaussian, substream_seed(seed, 2 * i, r));

            const std::size_t k_hd = hd(obs.coeffs, model.sigmas, dim).k_selected;
            const ErrorProfile prof =
                squared_error_profile(obs.coeffs, model.sigmas, model.x_coeffs, dim);
            double best = prof.total[0];
            for (std::size_t k = 1; k <= dim; ++k) best = std::min(best, prof.total[k]);

            const double err_hd = std::sqrt(prof.total[k_hd]);
            const double err_opt = std::sqrt(best);
            sum_hd += err_hd;
            sum_opt += err_opt;
            if (err_hd <= rep.constants.c_final * err_opt) ++ineq;
        }
        pt.mean_err_hd = sum_hd / static_cast<double>(runs);
        pt.mean_err_opt = sum_opt / static_cast<double>(runs);
        pt.oracle_ineq_freq = static_cast<double>(ineq) / static_cast<double>(runs);
        rep.points.push_back(pt);
    }

    // least-squares slope of ln(mean_err_hd) on ln(delta)
    if (rep.points.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(rep.points.size());
        for (const auto& pt : rep.points) {
            const double x = std::log(pt.delta);
            const double y = std::log(pt.mean_err_hd);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        rep.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return rep;
}

} // namespace hdp
