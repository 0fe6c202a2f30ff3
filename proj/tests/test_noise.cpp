#include <catch_amalgamated.hpp>

#include "hdp/noise.hpp"
#include "hdp/problems.hpp"
#include "hdp/rng.hpp"

using namespace hdp;

TEST_CASE("splitmix64 substreams are reproducible and distinct") {
    SplitMix64 a(9), b(9), c(10);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next() == b.next());
    bool differs = false;
    SplitMix64 a2(9);
    for (int i = 0; i < 100; ++i) differs |= (a2.next() != c.next());
    REQUIRE(differs);

    REQUIRE(substream_seed(1, 2, 3) == substream_seed(1, 2, 3));
    REQUIRE(substream_seed(1, 2, 3) != substream_seed(1, 2, 4));
    REQUIRE(substream_seed(1, 2, 3) != substream_seed(1, 3, 3));
    REQUIRE(substream_seed(1, 2, 3) != substream_seed(2, 2, 3));

    SplitMix64 u(123);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.next_double();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
    }
}

TEST_CASE("gaussian stream moments") {
    GaussianStream g(31);
    const std::size_t n = 200000;
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.next();
        mean += x;
        var += x * x;
    }
    mean /= static_cast<double>(n);
    var = var / static_cast<double>(n) - mean * mean;
    REQUIRE(std::abs(mean) < 0.01);
    REQUIRE_THAT(var, Catch::Matchers::WithinRel(1.0, 0.02));
}

TEST_CASE("pareto law is centered with unit variance") {
    // shifted generalized Pareto with shape 1/3: mean 0 and variance 1 by
    // construction, third moment infinite
    REQUIRE_THAT(pareto_scale(), Catch::Matchers::WithinAbs(2.0 / (3.0 * std::sqrt(3.0)), 1e-15));
    REQUIRE_THAT(pareto_shift(), Catch::Matchers::WithinAbs(-1.0 / std::sqrt(3.0), 1e-15));

    const Vector xs = sample_marginals(NoiseLaw::pareto, 200000, 8);
    double mean = 0.0, var = 0.0, lo = 0.0;
    for (double x : xs) {
        mean += x;
        var += x * x;
        lo = std::min(lo, x);
    }
    mean /= static_cast<double>(xs.size());
    var = var / static_cast<double>(xs.size()) - mean * mean;
    REQUIRE(std::abs(mean) < 0.1);
    REQUIRE(std::abs(var - 1.0) < 0.2);
    // support is bounded below by the shift
    REQUIRE(lo >= pareto_shift() - 1e-12);
}

TEST_CASE("three point law hits only its three values") {
    const Vector xs = sample_marginals(NoiseLaw::three_point, 100000, 5);
    const double r2 = std::sqrt(2.0);
    std::size_t plus = 0, minus = 0, zero = 0;
    for (double x : xs) {
        if (x == r2) ++plus;
        else if (x == -r2) ++minus;
        else if (x == 0.0) ++zero;
        else FAIL("unexpected value");
    }
    const double n = static_cast<double>(xs.size());
    REQUIRE(std::abs(plus / n - 0.25) < 0.01);
    REQUIRE(std::abs(minus / n - 0.25) < 0.01);
    REQUIRE(std::abs(zero / n - 0.5) < 0.01);
}

TEST_CASE("noise level from snr") {
    REQUIRE_THAT(delta_from_snr(10.0, 100, 10.0), Catch::Matchers::WithinAbs(0.1, 1e-15));
    REQUIRE_THAT(snr_from_delta(10.0, 100, 0.1), Catch::Matchers::WithinAbs(10.0, 1e-12));
    // round trip
    const double delta = delta_from_snr(3.7, 64, 25.0);
    REQUIRE_THAT(snr_from_delta(3.7, 64, delta), Catch::Matchers::WithinRel(25.0, 1e-12));

    REQUIRE_THROWS_AS(delta_from_snr(0.0, 100, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(delta_from_snr(1.0, 100, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(delta_from_snr(1.0, 0, 1.0), std::invalid_argument);
}

TEST_CASE("observation at zero noise returns exact data") {
    const auto p = generate_problem("phillips", 32);
    const auto spectral = observe(p, 0.0, {NoiseLaw::gaussian, NoiseBasis::spectral, 1});
    REQUIRE(spectral.coeffs == p.y_true_spectral);
    REQUIRE(spectral.true_delta == 0.0);

    const auto coord = observe(p, 0.0, {NoiseLaw::gaussian, NoiseBasis::coordinate, 1});
    for (std::size_t j = 0; j < 32; ++j)
        REQUIRE_THAT(coord.coeffs[j],
                     Catch::Matchers::WithinAbs(p.y_true_spectral[j], 1e-12));

    REQUIRE_THROWS_AS(observe(p, -0.1, {NoiseLaw::gaussian, NoiseBasis::spectral, 1}),
                      std::invalid_argument);
}

TEST_CASE("observations are reproducible per seed") {
    const auto p = generate_problem("gravity", 16);
    const auto a = observe(p, 0.3, {NoiseLaw::pareto, NoiseBasis::spectral, 99});
    const auto b = observe(p, 0.3, {NoiseLaw::pareto, NoiseBasis::spectral, 99});
    const auto c = observe(p, 0.3, {NoiseLaw::pareto, NoiseBasis::spectral, 100});
    REQUIRE(a.coeffs == b.coeffs);
    REQUIRE(a.coeffs != c.coeffs);
}

TEST_CASE("both injection bases carry the prescribed noise energy") {
    const auto p = generate_problem("deriv2", 64);
    const double delta = 0.05;
    for (const auto basis : {NoiseBasis::spectral, NoiseBasis::coordinate}) {
        double acc = 0.0;
        const std::size_t draws = 200;
        for (std::size_t r = 0; r < draws; ++r) {
            const auto obs = observe(p, delta, {NoiseLaw::gaussian, basis, 1000 + r});
            double s = 0.0;
            for (std::size_t j = 0; j < 64; ++j) {
                const double d = obs.coeffs[j] - p.y_true_spectral[j];
                s += d * d;
            }
            acc += s / (64.0 * delta * delta);
        }
        acc /= static_cast<double>(draws);
        REQUIRE_THAT(acc, Catch::Matchers::WithinRel(1.0, 0.2));
    }
}

TEST_CASE("pareto noise energy in the spectral basis") {
    const auto p = generate_problem("gravity", 512);
    const double delta = delta_from_snr(two_norm(p.y_true), 512, 1.0);
    double acc = 0.0;
    const std::size_t draws = 500;
    for (std::size_t r = 0; r < draws; ++r) {
        const auto obs = observe(p, delta, {NoiseLaw::pareto, NoiseBasis::spectral, 7000 + r});
        double s = 0.0;
        for (std::size_t j = 0; j < 512; ++j) {
            const double d = obs.coeffs[j] - p.y_true_spectral[j];
            s += d * d;
        }
        acc += s / (512.0 * delta * delta);
    }
    acc /= static_cast<double>(draws);
    REQUIRE_THAT(acc, Catch::Matchers::WithinRel(1.0, 0.15));
}

TEST_CASE("sequence observations") {
    const auto m = generate_sequence(16, 2.0, 2.0, CoeffMode::deterministic);
    const auto clean = observe_sequence(m, 0.0, NoiseLaw::gaussian, 3);
    for (std::size_t j = 0; j < 16; ++j)
        REQUIRE(clean.coeffs[j] == m.sigmas[j] * m.x_coeffs[j]);

    const auto noisy = observe_sequence(m, 0.1, NoiseLaw::gaussian, 3);
    REQUIRE(noisy.coeffs != clean.coeffs);
    REQUIRE(noisy.true_delta == 0.1);
}

TEST_CASE("adversarial observation construction") {
    const auto obs = adversarial_observation(5, 1.0, 10);
    Vector expected(10, 0.0);
    expected[3] = std::sqrt(2.0); // 1-based position m_delta - 1 = 4
    REQUIRE(obs.coeffs == expected);
    REQUIRE(obs.true_delta == 1.0);

    const auto scaled = adversarial_observation(5, 0.25, 12);
    REQUIRE(scaled.coeffs[3] == std::sqrt(2.0) * 0.25);

    REQUIRE_THROWS_AS(adversarial_observation(5, 1.0, 9), std::invalid_argument);
    REQUIRE_THROWS_AS(adversarial_observation(1, 1.0, 10), std::invalid_argument);
    REQUIRE_THROWS_AS(adversarial_observation(5, 0.0, 10), std::invalid_argument);
}

TEST_CASE("law and basis names round trip") {
    for (const auto law : {NoiseLaw::gaussian, NoiseLaw::pareto, NoiseLaw::three_point})
        REQUIRE(noise_law_from_string(to_string(law)) == law);
    for (const auto basis : {NoiseBasis::spectral, NoiseBasis::coordinate})
        REQUIRE(noise_basis_from_string(to_string(basis)) == basis);
    REQUIRE_THROWS_AS(noise_law_from_string("cauchy"), std::invalid_argument);
    REQUIRE_THROWS_AS(noise_basis_from_string("fourier"), std::invalid_argument);
}
