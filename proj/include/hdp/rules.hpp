#pragma once

// Truncation-index selection rules.
//
// Indices k and m are 1-based spectral positions throughout, matching the
// usual sequence-space notation; k = 0 denotes the zero estimator. `rank`
// bounds the usable indices: matrix problems pass the numerical rank of the
// computed SVD, synthetic sequence models pass the full dimension since their
// sigmas are exact by construction.
//
// hd   heuristic discrepancy principle. For a window size m it minimizes
//      Psi_m(k) = sqrt(sum_{j=k}^m b_j^2) / sigma_k over 1 <= k <= m/2
//      (smallest minimizer on ties) and the final index is the largest
//      minimizer over m = 2..D. Never reads the noise level.
// dp   modified discrepancy principle. k_dp(m) is the smallest k with
//      sum_{j=k+1}^m b_j^2 <= tau m delta^2, maximized over the dyadic
//      window grid m in {1, 2, 4, ..., D} (D always included). Receives the
//      exact delta. See dp_window_grid for why the scan is not dense.
// oracle  minimizer of the true spectral error over k = 0..rank, smallest
//      minimizer on ties. Baseline only; reads the exact solution.

#include <cmath>
#include <utility>

#include "hdp/common.hpp"
#include "hdp/estimator.hpp"

namespace hdp {

enum class RuleKind { hd, dp, oracle };

struct RuleOutcome {
    RuleKind rule = RuleKind::hd;
    std::size_t k_selected = 0;
    // (m, k(m)) for every window size scanned; empty for the oracle
    std::vector<std::pair<std::size_t, std::size_t>> per_m_trace;
    // hd only: Psi at the selected pair, taken at the smallest m attaining
    // the selected k
    double psi_at_selection = 0.0;
};

inline double psi(std::size_t k, std::size_t m, const Vector& b, const Vector& sigmas,
                  std::size_t rank) {
    const std::size_t n = b.size();
    if (sigmas.size() != n) throw std::invalid_argument("psi: size mismatch");
    if (k < 1 || k > m || m > n) throw std::invalid_argument("psi: need 1 <= k <= m <= D");
    if (k > rank) throw ExcludedIndexError("psi: index beyond usable rank");
    double s = 0.0;
    for (std::size_t j = k; j <= m; ++j) s += b[j - 1] * b[j - 1];
    return std::sqrt(s) / sigmas[k - 1];
}

namespace detail {

// suffix[j] = sum_{t >= j} b_t^2 over 0-based t, suffix[n] = 0
inline Vector suffix_squares(const Vector& b) {
    Vector s(b.size() + 1, 0.0);
    for (std::size_t j = b.size(); j > 0; --j)
        s[j - 1] = s[j] + b[j - 1] * b[j - 1];
    return s;
}

inline std::size_t hd_argmin(std::size_t m, const Vector& suffix, const Vector& sigmas,
                             std::size_t rank) {
    const std::size_t kmax = std::min(m / 2, rank);
    if (m < 2 || kmax < 1)
        throw ExcludedIndexError("hd: empty candidate set");
    std::size_t best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= kmax; ++k) {
        const double val = std::sqrt(suffix[k - 1] - suffix[m]) / sigmas[k - 1];
        if (val < best) {
            best = val;
            best_k = k;
        }
    }
    return best_k;
}

} // namespace detail

inline std::size_t hd_for_m(std::size_t m, const Vector& b, const Vector& sigmas,
                            std::size_t rank) {
    if (sigmas.size() != b.size()) throw std::invalid_argument("hd_for_m: size mismatch");
    if (m < 2 || m > b.size()) throw std::invalid_argument("hd_for_m: need 2 <= m <= D");
    return detail::hd_argmin(m, detail::suffix_squares(b), sigmas, rank);
}

inline RuleOutcome hd(const Vector& b, const Vector& sigmas, std::size_t rank) {
    const std::size_t n = b.size();
    if (sigmas.size() != n) throw std::invalid_argument("hd: size mismatch");
    if (n < 2) throw std::invalid_argument("hd: need D >= 2");
    if (rank < 1) throw ExcludedIndexError("hd: empty candidate set");

    const Vector suffix = detail::suffix_squares(b);
    RuleOutcome out;
    out.rule = RuleKind::hd;
    out.per_m_trace.reserve(n - 1);
    std::size_t best_k = 0;
    std::size_t best_m = 0;
    for (std::size_t m = 2; m <= n; ++m) {
        const std::size_t km = detail::hd_argmin(m, suffix, sigmas, rank);
        out.per_m_trace.emplace_back(m, km);
        if (km > best_k) {
            best_k = km;
            best_m = m;
        }
    }
    out.k_selected = best_k;
    out.psi_at_selection = psi(best_k, best_m, b, sigmas, rank);
    return out;
}

inline std::size_t dp_for_m(std::size_t m, const Vector& b, double tau, double delta) {
    if (m < 1 || m > b.size()) throw std::invalid_argument("dp_for_m: need 1 <= m <= D");
    if (tau <= 0.0) throw std::invalid_argument("dp_for_m: tau must be positive");
    if (delta < 0.0) throw std::invalid_argument("dp_for_m: delta must be nonnegative");
    const double threshold = tau * static_cast<double>(m) * delta * delta;
    double tail = 0.0;
    for (std::size_t j = 1; j <= m; ++j) tail += b[j - 1] * b[j - 1];
    // tail currently holds sum_{j=1..m}; peel leading terms as k grows
    for (std::size_t k = 0; k <= m; ++k) {
        if (tail <= threshold) return k;
        tail -= b[k] * b[k];
    }
    return m; // unreachable: the empty tail always satisfies the bound
}

// Window sizes scanned by dp: 1, 2, 4, ... doubling up to D, with D itself
// always last. A dense scan would hand every single window a chance to latch
// onto one large noise coefficient (k_dp(m) = m fires as soon as
// b_m^2 > tau m delta^2), and for severely ill-posed spectra one such event
// per hundred runs already dominates the mean error. Doubling windows keep
// the maximizer within one refinement step of the dense scan on genuine
// signal, where the energy in a window grows with its width, while rare
// single-coefficient flukes lose almost all of their firing slots.
inline std::vector<std::size_t> dp_window_grid(std::size_t n) {
    std::vector<std::size_t> ms;
    for (std::size_t m = 1; m <= n && m != 0; m *= 2) ms.push_back(m);
    if (ms.empty() || ms.back() != n) ms.push_back(n);
    return ms;
}

inline RuleOutcome dp(const Vector& b, double tau, double delta) {
    const std::size_t n = b.size();
    if (n < 1) throw std::invalid_argument("dp: need D >= 1");
    if (tau <= 0.0) throw std::invalid_argument("dp: tau must be positive");
    if (delta < 0.0) throw std::invalid_argument("dp: delta must be nonnegative");

    const Vector suffix = detail::suffix_squares(b);
    RuleOutcome out;
    out.rule = RuleKind::dp;
    std::size_t best_k = 0;
    for (const std::size_t m : dp_window_grid(n)) {
        const double threshold = tau * static_cast<double>(m) * delta * delta;
        std::size_t km = m;
        for (std::size_t k = 0; k <= m; ++k) {
            if (suffix[k] - suffix[m] <= threshold) {
                km = k;
                break;
            }
        }
        out.per_m_trace.emplace_back(m, km);
        best_k = std::max(best_k, km);
    }
    out.k_selected = best_k;
    return out;
}

inline RuleOutcome oracle(const Vector& b, const Vector& sigmas, const Vector& x_spectral,
                          std::size_t rank) {
    const ErrorProfile prof = squared_error_profile(b, sigmas, x_spectral, rank);
    RuleOutcome out;
    out.rule = RuleKind::oracle;
    std::size_t best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= rank; ++k) {
        if (prof.total[k] < best) {
            best = prof.total[k];
            best_k = k;
        }
    }
    out.k_selected = best_k;
    return out;
}

// Per-window argmin along a grid of window sizes; the finite-noise
// stabilization phenomenon shows up as the argmin settling below
// min{k : sigma_k < sigma_1} for large m.
inline std::vector<std::pair<std::size_t, std::size_t>>
stabilization_diagnostic(const Vector& b, const Vector& sigmas, std::size_t rank,
                         const std::vector<std::size_t>& m_grid) {
    const Vector suffix = detail::suffix_squares(b);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(m_grid.size());
    for (std::size_t m : m_grid) {
        if (m < 2 || m > b.size())
            throw std::invalid_argument("stabilization_diagnostic: window out of range");
        out.emplace_back(m, detail::hd_argmin(m, suffix, sigmas, rank));
    }
    return out;
}

} // namespace hdp
