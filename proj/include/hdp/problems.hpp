#pragma once

// Discretized Fredholm test problems and the diagonal sequence model.
//
// All four integral operators are discretized by midpoint collocation on D
// points: with grid step h, quadrature nodes t_j = (j - 1/2) h and collocation
// points s_i = (i - 1/2) h, the matrix entry is h * kernel(s_i, t_j) and the
// data vector is y = K x with x sampled at the nodes. The heat problem is a
// Volterra operator and uses right-endpoint collocation s_i = i h so the
// kernel argument stays positive on the lower triangle; its source profile is
// likewise sampled at right endpoints, on the dilated argument 20 i h.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hdp/linalg.hpp"
#include "hdp/rng.hpp"

namespace hdp {

struct InverseProblem {
    std::string name;
    std::size_t dim = 0;
    Matrix kernel;
    Vector x_true;            // exact solution at the nodes
    Vector y_true;            // kernel * x_true
    SingularSystem system;
    Vector x_true_spectral;   // v_basis^T x_true
    Vector y_true_spectral;   // u_basis^T y_true
};

namespace detail {

inline double phillips_phi(double u) {
    if (std::abs(u) >= 3.0) return 0.0;
    return 1.0 + std::cos(std::numbers::pi * u / 3.0);
}

inline double heat_kernel(double u) {
    // exp(-1/(4u)) underflows harmlessly to zero for tiny u
    return std::pow(u, -1.5) / (2.0 * std::sqrt(std::numbers::pi)) * std::exp(-1.0 / (4.0 * u));
}

// Heat source profile on the rescaled argument ti = 20 t: parabolic ramp,
// quadratic hump peaking at 1, then exponential decay. Supported on the
// first half of [0, 1]; the kinks at ti = 2 and ti = 3 keep the spectral
// coefficients decaying slowly enough that the problem stays genuinely hard.
inline double heat_profile(double ti) {
    if (ti < 2.0) return 0.75 * ti * ti / 4.0;
    if (ti < 3.0) return 0.75 + (ti - 2.0) * (3.0 - ti);
    return 0.75 * std::exp(-(ti - 3.0) * 2.0);
}

} // namespace detail

inline const std::vector<std::string>& problem_names() {
    static const std::vector<std::string> names = {"deriv2", "phillips", "gravity", "heat"};
    return names;
}

inline InverseProblem generate_problem(const std::string& name, std::size_t dim) {
    if (dim < 8 || dim % 2 != 0)
        throw std::invalid_argument("generate_problem: dim must be even and >= 8");

    InverseProblem p;
    p.name = name;
    p.dim = dim;
    p.kernel = Matrix(dim, dim);
    p.x_true.assign(dim, 0.0);
    const double pi = std::numbers::pi;

    if (name == "deriv2") {
        const double h = 1.0 / static_cast<double>(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            const double s = (static_cast<double>(i) + 0.5) * h;
            for (std::size_t j = 0; j < dim; ++j) {
                const double t = (static_cast<double>(j) + 0.5) * h;
                p.kernel(i, j) = h * (s < t ? s * (t - 1.0) : t * (s - 1.0));
            }
        }
        for (std::size_t j = 0; j < dim; ++j)
            p.x_true[j] = (static_cast<double>(j) + 0.5) * h;
    } else if (name == "phillips") {
        const double h = 12.0 / static_cast<double>(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            const double s = -6.0 + (static_cast<double>(i) + 0.5) * h;
            for (std::size_t j = 0; j < dim; ++j) {
                const double t = -6.0 + (static_cast<double>(j) + 0.5) * h;
                p.kernel(i, j) = h * detail::phillips_phi(s - t);
            }
        }
        for (std::size_t j = 0; j < dim; ++j)
            p.x_true[j] = detail::phillips_phi(-6.0 + (static_cast<double>(j) + 0.5) * h);
    } else if (name == "gravity") {
        const double h = 1.0 / static_cast<double>(dim);
        const double depth = 0.25;
        for (std::size_t i = 0; i < dim; ++i) {
            const double s = (static_cast<double>(i) + 0.5) * h;
            for (std::size_t j = 0; j < dim; ++j) {
                const double t = (static_cast<double>(j) + 0.5) * h;
                const double r2 = depth * depth + (s - t) * (s - t);
                p.kernel(i, j) = h * depth * std::pow(r2, -1.5);
            }
        }
        for (std::size_t j = 0; j < dim; ++j) {
            const double t = (static_cast<double>(j) + 0.5) * h;
            p.x_true[j] = std::sin(pi * t) + 0.5 * std::sin(2.0 * pi * t);
        }
    } else if (name == "heat") {
        const double h = 1.0 / static_cast<double>(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            const double s = static_cast<double>(i + 1) * h;
            for (std::size_t j = 0; j <= i; ++j) {
                const double t = (static_cast<double>(j) + 0.5) * h;
                p.kernel(i, j) = h * detail::heat_kernel(s - t);
            }
        }
        for (std::size_t j = 0; j < dim / 2; ++j)
            p.x_true[j] = detail::heat_profile(20.0 * static_cast<double>(j + 1) /
                                               static_cast<double>(dim));
    } else {
        throw std::invalid_argument("generate_problem: unknown problem '" + name + "'");
    }

    p.y_true = matvec(p.kernel, p.x_true);
    p.system = svd(p.kernel);
    p.x_true_spectral = project_onto_columns(p.system.v_basis, p.x_true);
    p.y_true_spectral = project_onto_columns(p.system.u_basis, p.y_true);
    return p;
}

// Diagonal model: sigma_j = j^{-q/2}, x_j = j^{-eta/2} X_j with X_j either
// identically one or i.i.d. standard normal.
enum class CoeffMode { deterministic, gaussian };

struct SequenceModel {
    std::size_t dim = 0;
    double q = 0.0;
    double eta = 0.0;
    CoeffMode mode = CoeffMode::deterministic;
    Vector sigmas;
    Vector x_coeffs;
};

inline SequenceModel generate_sequence(std::size_t dim, double q, double eta,
                                       CoeffMode mode, std::uint64_t seed = 0) {
    if (dim < 2) throw std::invalid_argument("generate_sequence: dim must be >= 2");
    if (q <= 0.0) throw std::invalid_argument("generate_sequence: q must be positive");
    if (eta <= 1.0) throw std::invalid_argument("generate_sequence: eta must exceed 1");

    SequenceModel m;
    m.dim = dim;
    m.q = q;
    m.eta = eta;
    m.mode = mode;
    m.sigmas.resize(dim);
    m.x_coeffs.resize(dim);
    GaussianStream gs(seed);
    for (std::size_t j = 0; j < dim; ++j) {
        const double jj = static_cast<double>(j + 1);
        m.sigmas[j] = std::pow(jj, -q / 2.0);
        const double xj = (mode == CoeffMode::gaussian) ? gs.next() : 1.0;
        m.x_coeffs[j] = std::pow(jj, -eta / 2.0) * xj;
    }
    return m;
}

} // namespace hdp
