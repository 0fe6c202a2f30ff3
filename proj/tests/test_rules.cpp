#include <catch_amalgamated.hpp>

#include "hdp/estimator.hpp"
#include "hdp/noise.hpp"
#include "hdp/rng.hpp"
#include "hdp/rules.hpp"

using namespace hdp;

namespace {

// reference implementations with direct summation, used to pin the fast paths
std::size_t brute_hd_for_m(std::size_t m, const Vector& b, const Vector& sigmas,
                           std::size_t rank) {
    std::size_t best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    const std::size_t kmax = std::min(m / 2, rank);
    for (std::size_t k = 1; k <= kmax; ++k) {
        const double val = psi(k, m, b, sigmas, rank);
        if (val < best) {
            best = val;
            best_k = k;
        }
    }
    return best_k;
}

std::size_t brute_hd(const Vector& b, const Vector& sigmas, std::size_t rank) {
    std::size_t best = 0;
    for (std::size_t m = 2; m <= b.size(); ++m)
        best = std::max(best, brute_hd_for_m(m, b, sigmas, rank));
    return best;
}

std::size_t brute_dp(const Vector& b, double tau, double delta) {
    std::size_t best = 0;
    std::vector<std::size_t> windows;
    for (std::size_t m = 1; m < b.size(); m *= 2) windows.push_back(m);
    windows.push_back(b.size());
    for (const std::size_t m : windows) {
        for (std::size_t k = 0; k <= m; ++k) {
            double tail = 0.0;
            for (std::size_t j = k + 1; j <= m; ++j) tail += b[j - 1] * b[j - 1];
            if (tail <= tau * static_cast<double>(m) * delta * delta) {
                best = std::max(best, k);
                break;
            }
        }
    }
    return best;
}

std::size_t brute_oracle(const Vector& b, const Vector& sigmas, const Vector& x,
                         std::size_t rank) {
    std::size_t best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= rank; ++k) {
        double err2 = 0.0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double rec = (j < k) ? b[j] / sigmas[j] : 0.0;
            const double d = rec - x[j];
            err2 += d * d;
        }
        if (err2 < best) {
            best = err2;
            best_k = k;
        }
    }
    return best_k;
}

} // namespace

TEST_CASE("psi hand values") {
    const Vector sigmas = {1.0, 1.0, 1.0, 1.0};
    const Vector b = {0.0, 3.0, 4.0, 0.0};
    REQUIRE(psi(2, 4, b, sigmas, 4) == 5.0);
    REQUIRE(psi(1, 4, b, sigmas, 4) == 5.0);
    REQUIRE(psi(1, 2, b, sigmas, 4) == 3.0);
    REQUIRE(psi(4, 4, b, sigmas, 4) == 0.0);

    // sigma rescaling enters only through the leading index
    const Vector sig2 = {2.0, 0.5, 1.0, 1.0};
    REQUIRE(psi(1, 4, b, sig2, 4) == 2.5);
    REQUIRE(psi(2, 4, b, sig2, 4) == 10.0);

    const Vector sig3 = {1.0, 0.5, 0.25, 0.125};
    const Vector ones = {1.0, 1.0, 1.0, 1.0};
    REQUIRE_THAT(psi(2, 4, ones, sig3, 4),
                 Catch::Matchers::WithinRel(2.0 * std::sqrt(3.0), 1e-15));
}

TEST_CASE("psi validates its window") {
    const Vector sigmas = {1.0, 1.0, 1.0, 1.0};
    const Vector b = {1.0, 1.0, 1.0, 1.0};
    REQUIRE_THROWS_AS(psi(0, 4, b, sigmas, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(psi(3, 2, b, sigmas, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(psi(1, 5, b, sigmas, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(psi(3, 4, b, sigmas, 2), ExcludedIndexError);
}

TEST_CASE("hd window argmin with ties") {
    const Vector sigmas = {1.0, 1.0, 1.0, 1.0};
    const Vector b = {0.0, 3.0, 4.0, 0.0};
    // candidates k = 1, 2 both give 5: smallest wins
    REQUIRE(hd_for_m(4, b, sigmas, 4) == 1);
    REQUIRE(hd_for_m(2, b, sigmas, 4) == 1);
    REQUIRE_THROWS_AS(hd_for_m(1, b, sigmas, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(hd_for_m(5, b, sigmas, 4), std::invalid_argument);

    // decaying sigmas reward cutting the large leading coefficient
    const Vector sig3 = {1.0, 0.5, 0.25, 0.125};
    const Vector c = {2.0, 0.1, 0.1, 0.1};
    REQUIRE(hd_for_m(4, c, sig3, 4) == 2);
}

TEST_CASE("hd on zero data picks the smallest index everywhere") {
    const Vector b(12, 0.0);
    const Vector sigmas = {12, 1.0};
    const auto out = hd(b, Vector(12, 1.0), 12);
    REQUIRE(out.k_selected == 1);
    REQUIRE(out.psi_at_selection == 0.0);
    REQUIRE(out.per_m_trace.size() == 11);
    for (const auto& [m, km] : out.per_m_trace) REQUIRE(km == 1);
}

TEST_CASE("hd trace respects the half-window bound") {
    GaussianStream g(17);
    Vector b(40), sigmas(40);
    for (std::size_t j = 0; j < 40; ++j) {
        b[j] = g.next();
        sigmas[j] = std::exp(-0.1 * static_cast<double>(j));
    }
    const auto out = hd(b, sigmas, 40);
    for (const auto& [m, km] : out.per_m_trace) {
        REQUIRE(km >= 1);
        REQUIRE(km <= m / 2);
    }
    REQUIRE(out.k_selected == brute_hd(b, sigmas, 40));
}

TEST_CASE("hd ignores indices beyond the usable rank") {
    GaussianStream g(18);
    Vector b(20), sigmas(20);
    for (std::size_t j = 0; j < 20; ++j) {
        b[j] = g.next();
        sigmas[j] = 1.0 / static_cast<double>(j + 1);
    }
    const auto out = hd(b, sigmas, 3);
    REQUIRE(out.k_selected <= 3);
    REQUIRE(out.k_selected == brute_hd(b, sigmas, 3));
    REQUIRE_THROWS_AS(hd(b, sigmas, 0), ExcludedIndexError);
}

TEST_CASE("hd selection is scale covariant") {
    GaussianStream g(19);
    Vector b(30), sigmas(30);
    for (std::size_t j = 0; j < 30; ++j) {
        b[j] = g.next();
        sigmas[j] = std::pow(static_cast<double>(j + 1), -1.0);
    }
    Vector scaled = b;
    for (auto& x : scaled) x *= 7.25;
    REQUIRE(hd(b, sigmas, 30).k_selected == hd(scaled, sigmas, 30).k_selected);
}

TEST_CASE("hd spots the adversarial construction") {
    // sigma_j^2 = e^{-j}, spike at position m_delta - 1 = 4
    const std::size_t dim = 10;
    Vector sigmas(dim);
    for (std::size_t j = 0; j < dim; ++j)
        sigmas[j] = std::exp(-0.5 * static_cast<double>(j + 1));
    const auto obs = adversarial_observation(5, 1.0, dim);

    REQUIRE(psi(5, 10, obs.coeffs, sigmas, dim) == 0.0);
    REQUIRE(hd_for_m(10, obs.coeffs, sigmas, dim) == 5);
    const auto out = hd(obs.coeffs, sigmas, dim);
    REQUIRE(out.k_selected == 5);
    REQUIRE(out.psi_at_selection == 0.0);
}

TEST_CASE("dp hand values") {
    const Vector sigmas = {1.0, 1.0, 1.0, 1.0};
    Vector b = {2.0, 0.0, 0.0, 0.0};
    // threshold tau m delta^2 = 6 at m = 4 already covers the full energy 4
    REQUIRE(dp_for_m(4, b, 1.5, 1.0) == 0);
    b[0] = 3.0; // energy 9 > 6, peel one index
    REQUIRE(dp_for_m(4, b, 1.5, 1.0) == 1);
    REQUIRE(dp(b, 1.5, 1.0).k_selected == 1);

    // delta = 0 forces the cut past the last nonzero coefficient
    const Vector c = {1.0, 0.5, 0.0, 0.0};
    REQUIRE(dp(c, 1.5, 0.0).k_selected == 2);

    REQUIRE_THROWS_AS(dp_for_m(0, b, 1.5, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(dp_for_m(5, b, 1.5, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(dp(b, 0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(dp(b, 1.5, -1.0), std::invalid_argument);
}

TEST_CASE("dp trace is consistent with its per window rule") {
    GaussianStream g(23);
    Vector b(25);
    for (auto& x : b) x = g.next();
    const auto out = dp(b, 1.5, 0.8);
    const std::vector<std::size_t> windows = {1, 2, 4, 8, 16, 25};
    REQUIRE(out.per_m_trace.size() == windows.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& [m, km] = out.per_m_trace[i];
        REQUIRE(m == windows[i]);
        REQUIRE(km == dp_for_m(m, b, 1.5, 0.8));
        best = std::max(best, km);
    }
    REQUIRE(out.k_selected == best);
}

TEST_CASE("oracle on exact data keeps every informative mode") {
    const Vector sigmas = {1.0, 0.5, 0.25, 0.125};
    const Vector x = {1.0, 1.0, 1.0, 1.0};
    Vector b(4);
    for (std::size_t j = 0; j < 4; ++j) b[j] = sigmas[j] * x[j];
    const auto out = oracle(b, sigmas, x, 4);
    REQUIRE(out.k_selected == 4);
}

TEST_CASE("oracle on a zero solution keeps nothing") {
    GaussianStream g(31);
    const Vector sigmas = {1.0, 0.5, 0.25, 0.125};
    const Vector x(4, 0.0);
    Vector b(4);
    for (auto& v : b) v = 0.3 * g.next();
    REQUIRE(oracle(b, sigmas, x, 4).k_selected == 0);
}

TEST_CASE("selected rules beat or match each other per draw") {
    GaussianStream g(29);
    const std::size_t dim = 24;
    Vector sigmas(dim), x(dim), b(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        sigmas[j] = std::pow(static_cast<double>(j + 1), -1.5);
        x[j] = std::pow(static_cast<double>(j + 1), -1.0);
        b[j] = sigmas[j] * x[j] + 0.01 * g.next();
    }
    const auto prof = squared_error_profile(b, sigmas, x, dim);
    const std::size_t k_hd = hd(b, sigmas, dim).k_selected;
    const std::size_t k_dp = std::min<std::size_t>(dp(b, 1.5, 0.01).k_selected, dim);
    const std::size_t k_opt = oracle(b, sigmas, x, dim).k_selected;
    REQUIRE(prof.total[k_opt] <= prof.total[k_hd]);
    REQUIRE(prof.total[k_opt] <= prof.total[k_dp]);
}

TEST_CASE("rules agree with exhaustive scans on random instances") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        GaussianStream g(1000 + seed);
        const std::size_t dim = 8 + 2 * (seed % 13);
        Vector sigmas(dim), x(dim), b(dim);
        double s = 1.0;
        for (std::size_t j = 0; j < dim; ++j) {
            s *= std::exp(-0.2 * std::abs(g.next()));
            sigmas[j] = s;
            x[j] = g.next();
            b[j] = sigmas[j] * x[j] + 0.05 * g.next();
        }
        const double delta = 0.02 + 0.05 * std::abs(g.next());

        REQUIRE(hd(b, sigmas, dim).k_selected == brute_hd(b, sigmas, dim));
        REQUIRE(dp(b, 1.5, delta).k_selected == brute_dp(b, 1.5, delta));
        REQUIRE(oracle(b, sigmas, x, dim).k_selected == brute_oracle(b, sigmas, x, dim));
    }
}

TEST_CASE("stabilization diagnostic") {
    // on zero data every window reports index one
    const Vector zero(64, 0.0);
    const auto flat = stabilization_diagnostic(zero, Vector(64, 1.0), 64, {8, 16, 32, 64});
    for (const auto& [m, km] : flat) REQUIRE(km == 1);

    // sigma = (1, 1, 0.5, 0.25, ...): plateau of length two. Once the window
    // is long enough that accumulated noise energy outweighs the signal tail
    // past the plateau, the argmin settles below index 3.
    const std::size_t dim = 64;
    const double delta = 0.05;
    Vector sigmas(dim), x(dim), clean(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        sigmas[j] = (j < 2) ? 1.0 : std::pow(0.5, static_cast<double>(j - 1));
        x[j] = std::exp(-static_cast<double>(j + 1));
        clean[j] = sigmas[j] * x[j];
    }
    std::size_t below = 0;
    const std::size_t draws = 200;
    for (std::size_t r = 0; r < draws; ++r) {
        GaussianStream g(4000 + r);
        Vector b = clean;
        for (auto& v : b) v += delta * g.next();
        const auto diag = stabilization_diagnostic(b, sigmas, dim, {dim});
        if (diag[0].second < 3) ++below;
    }
    REQUIRE(below >= 190);

    REQUIRE_THROWS_AS(stabilization_diagnostic(zero, Vector(64, 1.0), 64, {1}),
                      std::invalid_argument);
}

TEST_CASE("cutoff estimate hand values") {
    SpectralObservation obs;
    obs.coeffs = {2.0, 3.0};
    obs.true_delta = 0.1;
    const Vector sigmas = {2.0, 1.0};

    const auto zero = cutoff_estimate(0, obs, sigmas, 2);
    REQUIRE(zero.x_spectral == Vector{0.0, 0.0});
    REQUIRE(cutoff_estimate(1, obs, sigmas, 2).x_spectral == Vector{1.0, 0.0});
    REQUIRE(cutoff_estimate(2, obs, sigmas, 2).x_spectral == Vector{1.0, 3.0});
    REQUIRE_THROWS_AS(cutoff_estimate(2, obs, sigmas, 1), ExcludedIndexError);

    SpectralObservation halves;
    halves.coeffs = {1.0, 1.0};
    halves.true_delta = 0.0;
    REQUIRE(cutoff_estimate(2, halves, {1.0, 0.5}, 2).x_spectral == Vector{1.0, 2.0});
}

TEST_CASE("relative error matches hand computation") {
    const Vector x_true = {1.0, 3.0};
    REQUIRE_THAT(relative_error_spectral({1.0, 0.0}, x_true),
                 Catch::Matchers::WithinAbs(3.0 / std::sqrt(10.0), 1e-14));
    // the zero estimator sits at relative error one
    REQUIRE(relative_error_spectral({0.0, 0.0}, x_true) == 1.0);
    REQUIRE(relative_error_spectral(x_true, x_true) == 0.0);
    REQUIRE_THROWS_AS(relative_error_spectral({1.0, 0.0}, {0.0, 0.0}),
                      std::invalid_argument);
}

TEST_CASE("error profile is an exact bias variance split") {
    GaussianStream g(37);
    const std::size_t dim = 20, rank = 17;
    Vector sigmas(dim), x(dim), b(dim);
    double s = 1.0;
    for (std::size_t j = 0; j < dim; ++j) {
        s *= 0.8;
        sigmas[j] = s;
        x[j] = g.next();
        b[j] = sigmas[j] * x[j] + 0.1 * g.next();
    }
    SpectralObservation obs;
    obs.coeffs = b;
    obs.true_delta = 0.1;

    const auto prof = squared_error_profile(b, sigmas, x, rank);
    REQUIRE(prof.total.size() == rank + 1);
    for (std::size_t k = 0; k <= rank; ++k) {
        const auto rec = cutoff_estimate(k, obs, sigmas, rank);
        double direct = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = rec.x_spectral[j] - x[j];
            direct += d * d;
        }
        REQUIRE_THAT(prof.total[k], Catch::Matchers::WithinRel(direct, 1e-12));
        REQUIRE(prof.total[k] == prof.data_term[k] + prof.bias_term[k]);
    }
    // variance-like part grows, bias part shrinks
    for (std::size_t k = 1; k <= rank; ++k) {
        REQUIRE(prof.data_term[k] >= prof.data_term[k - 1]);
        REQUIRE(prof.bias_term[k] <= prof.bias_term[k - 1]);
    }
}

TEST_CASE("spectral and coordinate errors agree through the basis") {
    GaussianStream g(41);
    Matrix k(12, 12);
    for (auto& v : k.data) v = g.next();
    const auto sys = svd(k);

    Vector x(12);
    for (auto& v : x) v = g.next();
    const Vector x_spec = project_onto_columns(sys.v_basis, x);

    SpectralObservation obs;
    obs.coeffs.resize(12);
    obs.true_delta = 0.1;
    for (std::size_t j = 0; j < 12; ++j)
        obs.coeffs[j] = sys.sigmas[j] * x_spec[j] + 0.1 * g.next();

    const auto rec = cutoff_estimate(5, obs, sys.sigmas, sys.numerical_rank);
    const Vector x_rec = to_coordinates(rec, sys.v_basis);
    REQUIRE_THAT(norm_of_difference(x_rec, x),
                 Catch::Matchers::WithinRel(norm_of_difference(rec.x_spectral, x_spec), 1e-10));
}
