#pragma once

// Noise models and observation synthesis.
//
// All three laws have mean zero and unit variance, so delta is always the
// exact noise level:
//   gaussian     standard normal
//   pareto       generalized Pareto, shape 1/3, rescaled and shifted; heavy
//                tail (third moment infinite), used to stress the rules
//   three_point  0 with prob. 1/2, +sqrt(2) and -sqrt(2) with prob. 1/4 each

#include <cmath>
#include <cstdint>
#include <string>

#include "hdp/common.hpp"
#include "hdp/problems.hpp"
#include "hdp/rng.hpp"

namespace hdp {

enum class NoiseLaw { gaussian, pareto, three_point };
enum class NoiseBasis { spectral, coordinate };

struct NoiseSpec {
    NoiseLaw law = NoiseLaw::gaussian;
    NoiseBasis basis = NoiseBasis::spectral;
    std::uint64_t seed = 0;
};

// Noisy spectral data b_j = (y^delta, u_j). true_delta is carried for the
// discrepancy principle and for bookkeeping only; heuristic rules must not
// read it.
struct SpectralObservation {
    Vector coeffs;
    double true_delta = 0.0;
};

inline constexpr double kParetoShape = 1.0 / 3.0;

inline double pareto_scale() {
    return (1.0 - kParetoShape) * std::sqrt(1.0 - 2.0 * kParetoShape);
}

inline double pareto_shift() { return -pareto_scale() / (1.0 - kParetoShape); }

// One unit-variance draw per call from a shared uniform/normal stream.
class NoiseStream {
public:
    NoiseStream(NoiseLaw law, std::uint64_t seed) : law_(law), gauss_(seed) {}

    double next() {
        switch (law_) {
        case NoiseLaw::gaussian:
            return gauss_.next();
        case NoiseLaw::pareto: {
            const double u = gauss_.next_uniform();
            const double t = std::pow(1.0 - u, -kParetoShape) - 1.0;
            return pareto_shift() + pareto_scale() * t / kParetoShape;
        }
        case NoiseLaw::three_point: {
            const double u = gauss_.next_uniform();
            if (u < 0.25) return std::sqrt(2.0);
            if (u < 0.5) return -std::sqrt(2.0);
            return 0.0;
        }
        }
        return 0.0;
    }

private:
    NoiseLaw law_;
    GaussianStream gauss_;
};

inline Vector sample_marginals(NoiseLaw law, std::size_t n, std::uint64_t seed) {
    NoiseStream stream(law, seed);
    Vector out(n);
    for (auto& x : out) x = stream.next();
    return out;
}

// snr = ||y|| / sqrt(D delta^2)
inline double delta_from_snr(double y_norm, std::size_t dim, double snr) {
    if (y_norm <= 0.0 || snr <= 0.0 || dim == 0)
        throw std::invalid_argument("delta_from_snr: positive norm, snr and dim required");
    return y_norm / (snr * std::sqrt(static_cast<double>(dim)));
}

inline double snr_from_delta(double y_norm, std::size_t dim, double delta) {
    if (y_norm <= 0.0 || delta <= 0.0 || dim == 0)
        throw std::invalid_argument("snr_from_delta: positive norm, delta and dim required");
    return y_norm / (delta * std::sqrt(static_cast<double>(dim)));
}

// Synthesize one observation. Spectral basis perturbs the spectral
// coefficients directly; coordinate basis perturbs y and projects. delta = 0
// is allowed as a degenerate hook for tests and returns the exact data.
inline SpectralObservation observe(const InverseProblem& p, double delta,
                                   const NoiseSpec& spec) {
    if (delta < 0.0) throw std::invalid_argument("observe: delta must be nonnegative");
    SpectralObservation obs;
    obs.true_delta = delta;
    NoiseStream stream(spec.law, spec.seed);
    if (spec.basis == NoiseBasis::spectral) {
        obs.coeffs = p.y_true_spectral;
        for (auto& b : obs.coeffs) b += delta * stream.next();
    } else {
        Vector y = p.y_true;
        for (auto& yi : y) yi += delta * stream.next();
        obs.coeffs = project_onto_columns(p.system.u_basis, y);
    }
    return obs;
}

// Observation for a diagonal sequence model: b_j = sigma_j x_j + delta xi_j.
inline SpectralObservation observe_sequence(const SequenceModel& m, double delta,
                                            NoiseLaw law, std::uint64_t seed) {
    if (delta < 0.0) throw std::invalid_argument("observe_sequence: delta must be nonnegative");
    SpectralObservation obs;
    obs.true_delta = delta;
    obs.coeffs.resize(m.dim);
    NoiseStream stream(law, seed);
    for (std::size_t j = 0; j < m.dim; ++j)
        obs.coeffs[j] = m.sigmas[j] * m.x_coeffs[j] + delta * stream.next();
    return obs;
}

// Worst-case observation that blinds the heuristic rule: a single spike of
// size sqrt(2) delta at spectral position m_delta - 1 (1-based), zeros
// elsewhere. Needs room for the diagnostic window [1, 2 m_delta].
inline SpectralObservation adversarial_observation(std::size_t m_delta, double delta,
                                                   std::size_t dim) {
    if (m_delta < 2) throw std::invalid_argument("adversarial_observation: m_delta must be >= 2");
    if (delta <= 0.0) throw std::invalid_argument("adversarial_observation: delta must be positive");
    if (dim < 2 * m_delta)
        throw std::invalid_argument("adversarial_observation: dim must be >= 2 m_delta");
    SpectralObservation obs;
    obs.true_delta = delta;
    obs.coeffs.assign(dim, 0.0);
    obs.coeffs[m_delta - 2] = std::sqrt(2.0) * delta;
    return obs;
}

inline std::string to_string(NoiseLaw law) {
    switch (law) {
    case NoiseLaw::gaussian: return "gaussian";
    case NoiseLaw::pareto: return "pareto";
    case NoiseLaw::three_point: return "three_point";
    }
    return "?";
}

inline std::string to_string(NoiseBasis basis) {
    return basis == NoiseBasis::spectral ? "spectral" : "coordinate";
}

inline NoiseLaw noise_law_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseLaw::gaussian;
    if (s == "pareto") return NoiseLaw::pareto;
    if (s == "three_point") return NoiseLaw::three_point;
    throw std::invalid_argument("unknown noise law '" + s + "'");
}

inline NoiseBasis noise_basis_from_string(const std::string& s) {
    if (s == "spectral") return NoiseBasis::spectral;
    if (s == "coordinate") return NoiseBasis::coordinate;
    throw std::invalid_argument("unknown noise basis '" + s + "'");
}

} // namespace hdp
