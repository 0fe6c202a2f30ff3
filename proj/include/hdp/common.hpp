#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdp {

using Vector = std::vector<double>;

// Data-dependent failure of an iterative routine. Carries the residual that
// refused to converge so callers can report it.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Requested spectral index lies outside the usable (rank-limited) range.
class ExcludedIndexError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hdp
