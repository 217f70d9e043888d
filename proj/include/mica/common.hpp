#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>

namespace mica {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when a numerical procedure cannot proceed (rank deficiency,
/// singular Cayley step, too many failed replications, ...).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// MDC denominator factor at or below the configured floor.
struct DegenerateDenominator : NumericalError {
    using NumericalError::NumericalError;
};

/// A projected component is constant, so the objective is ill-posed.
struct DegenerateProjection : NumericalError {
    using NumericalError::NumericalError;
};

/// (I + tau/2 W) is numerically singular; the caller should shrink tau.
struct SingularCayleyStep : NumericalError {
    using NumericalError::NumericalError;
};

/// Pairwise (tree) summation. Deterministic for a fixed input order and
/// more accurate than sequential accumulation on long inputs.
double pairwise_sum(std::span<const double> values);

namespace detail {

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const char* what) {
    if (!m.allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite input");
}

}  // namespace detail

}  // namespace mica
