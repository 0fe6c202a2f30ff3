#pragma once

// Spectral cut-off estimator and error functionals.
//
// For a truncation index k the estimate keeps the first k spectral modes,
// x_k = sum_{j<=k} (b_j / sigma_j) v_j, and k = 0 is the zero estimator.
// Because the bases are orthonormal, every error below is computed in
// spectral coordinates.

#include <cmath>

#include "hdp/common.hpp"
#include "hdp/linalg.hpp"
#include "hdp/noise.hpp"

namespace hdp {

struct Reconstruction {
    std::size_t k = 0;
    Vector x_spectral;
};

inline Reconstruction cutoff_estimate(std::size_t k, const SpectralObservation& obs,
                                      const Vector& sigmas, std::size_t rank) {
    if (obs.coeffs.size() != sigmas.size())
        throw std::invalid_argument("cutoff_estimate: size mismatch");
    if (k > rank)
        throw ExcludedIndexError("cutoff_estimate: k exceeds usable rank");
    Reconstruction rec;
    rec.k = k;
    rec.x_spectral.assign(sigmas.size(), 0.0);
    for (std::size_t j = 0; j < k; ++j)
        rec.x_spectral[j] = obs.coeffs[j] / sigmas[j];
    return rec;
}

inline Vector to_coordinates(const Reconstruction& rec, const Matrix& v_basis) {
    if (v_basis.cols != rec.x_spectral.size())
        throw std::invalid_argument("to_coordinates: size mismatch");
    return matvec(v_basis, rec.x_spectral);
}

inline double norm_of_difference(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("norm_of_difference: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double relative_error_spectral(const Vector& x_rec_spectral,
                                      const Vector& x_true_spectral) {
    const double denom = two_norm(x_true_spectral);
    if (denom <= 0.0)
        throw std::invalid_argument("relative_error_spectral: zero truth norm");
    return norm_of_difference(x_rec_spectral, x_true_spectral) / denom;
}

// Squared error of the cut-off estimate for every k = 0..rank in one O(D)
// pass: err2[k] = sum_{j<=k} (b_j/sigma_j - x_j)^2 + sum_{j>k} x_j^2. The
// first term is the data (variance-like) part, the second the truncation
// bias, and their sum is an exact identity for the squared spectral error.
struct ErrorProfile {
    Vector data_term;    // size rank+1
    Vector bias_term;    // size rank+1
    Vector total;        // elementwise sum
};

inline ErrorProfile squared_error_profile(const Vector& b, const Vector& sigmas,
                                          const Vector& x_spectral, std::size_t rank) {
    const std::size_t n = b.size();
    if (sigmas.size() != n || x_spectral.size() != n)
        throw std::invalid_argument("squared_error_profile: size mismatch");
    if (rank > n)
        throw std::invalid_argument("squared_error_profile: rank exceeds dimension");

    ErrorProfile prof;
    prof.data_term.assign(rank + 1, 0.0);
    prof.bias_term.assign(rank + 1, 0.0);
    prof.total.assign(rank + 1, 0.0);

    double acc = 0.0;
    for (std::size_t k = 1; k <= rank; ++k) {
        const double d = b[k - 1] / sigmas[k - 1] - x_spectral[k - 1];
        acc += d * d;
        prof.data_term[k] = acc;
    }
    // bias: suffix sums of x^2, from the tail inwards so bias_term[rank]
    // covers indices > rank as well
    double tail = 0.0;
    for (std::size_t j = n; j > rank; --j) tail += x_spectral[j - 1] * x_spectral[j - 1];
    prof.bias_term[rank] = tail;
    for (std::size_t k = rank; k > 0; --k) {
        tail += x_spectral[k - 1] * x_spectral[k - 1];
        prof.bias_term[k - 1] = tail;
    }
    for (std::size_t k = 0; k <= rank; ++k)
        prof.total[k] = prof.data_term[k] + prof.bias_term[k];
    return prof;
}

} // namespace hdp
