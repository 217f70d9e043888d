#pragma once

#include <vector>

#include "mica/common.hpp"

namespace mica {

/// Response/conditioner windows aligned for a lag-h dependence measure:
/// response holds rows h+1..n of one column, conditioner rows 1..n-h of a
/// column set, so that row k of each refers to times t=h+k and t=k.
struct LaggedPair {
    Vector response;
    Matrix conditioner;
    int lag = 0;
};

/// Sample MDD^2(v | u) = -(1/n^2) sum_{i,j} (v_i - vbar)(v_j - vbar) ||u_i - u_j||.
/// V-statistic form (i = j terms included, 1/n^2 normalization). For a single
/// conditioner column the evaluation is O(n log n) via sorting and prefix
/// sums; otherwise O(n^2 q).
double mdd_sq(const Vector& v, const Matrix& u);
double mdd_sq(const Vector& v, const Vector& u);

/// Sample distance variance (1/n^2) sum B_ij^2 with B the double-centered
/// matrix of pairwise Euclidean distances ||u_i - u_j||.
double dvar(const Matrix& u);
double dvar(const Vector& u);

/// tr(var_hat(v)^2) for scalar v: the squared biased sample variance.
double tr_var_sq(const Vector& v);

/// Sample MDC^2(v | u) = MDD^2(v | u) / (tr_var_sq(v)^{1/2} dvar(u)^{1/2}).
/// Throws DegenerateDenominator when either factor is <= eps_den. The value
/// is reported raw (no clamping to [0, 1]).
double mdc_sq(const Vector& v, const Matrix& u, double eps_den = 1e-12);
double mdc_sq(const Vector& v, const Vector& u, double eps_den = 1e-12);

/// Aligns response column rows h+1..n against conditioner column rows 1..n-h.
LaggedPair make_lagged(const Matrix& x, Index response_col,
                       const std::vector<Index>& conditioner_cols, int lag);

}  // namespace mica
