#include "mica/mdd.hpp"

#include <algorithm>
#include <cmath>

#include "mdd_detail.hpp"

namespace mica {

namespace {

void check_pair(const Vector& v, const Matrix& u) {
    if (v.size() != u.rows())
        throw std::invalid_argument("mdd: response/conditioner row count mismatch");
    if (v.size() < 2) throw std::invalid_argument("mdd: need at least 2 rows");
    if (u.cols() < 1) throw std::invalid_argument("mdd: empty conditioner");
    detail::require_finite(v, "mdd response");
    detail::require_finite(u, "mdd conditioner");
}

// O(n^2 q) evaluation with per-row vectorized distances and pairwise-summed
// row contributions.
double mdd_general(const Vector& v, const Matrix& u) {
    const Index n = v.size();
    const Vector c = v.array() - v.mean();
    std::vector<double> rows(static_cast<std::size_t>(n));
    Vector dist(n);
    for (Index i = 0; i < n; ++i) {
        dist = (u.rowwise() - u.row(i)).rowwise().norm();
        rows[static_cast<std::size_t>(i)] = c(i) * c.dot(dist);
    }
    const double total = pairwise_sum(rows);
    return -total / (static_cast<double>(n) * static_cast<double>(n));
}

// Row sums r_i = sum_j |u_i - u_j| of the scalar distance matrix, plus the
// grand sum, via one sort. Returns (sum of r_i^2, grand sum).
std::pair<double, double> scalar_dist_row_sums(const Vector& u) {
    const Index n = u.size();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return u(a) < u(b); });
    double prefix = 0.0;
    const double all = u.sum();
    double sum_r2 = 0.0, grand = 0.0;
    for (Index k = 0; k < n; ++k) {
        const double w = u(order[static_cast<std::size_t>(k)]);
        // sum_{l<k}(w - w_l) + sum_{l>k}(w_l - w)
        const double r = w * static_cast<double>(k) - prefix +
                         (all - prefix - w) - w * static_cast<double>(n - 1 - k);
        sum_r2 += r * r;
        grand += r;
        prefix += w;
    }
    return {sum_r2, grand};
}

}  // namespace

double mdd_sq(const Vector& v, const Matrix& u) {
    check_pair(v, u);
    const Index n = v.size();
    if (u.cols() == 1) {
        const auto sc = detail::SortedConditioner::build(u.col(0).data(),
                                                         static_cast<int>(n));
        detail::MddWorkspace ws;
        return detail::mdd_sorted(v.data(), sc, ws);
    }
    return mdd_general(v, u);
}

double mdd_sq(const Vector& v, const Vector& u) {
    return mdd_sq(v, Matrix(u));
}

double dvar(const Matrix& u) {
    if (u.rows() < 2) throw std::invalid_argument("dvar: need at least 2 rows");
    detail::require_finite(u, "dvar input");
    const Index n = u.rows();
    const double dn = static_cast<double>(n);
    double sum_b2 = 0.0, sum_r2 = 0.0, grand = 0.0;
    if (u.cols() == 1) {
        // sum b_ij^2 = sum (u_i - u_j)^2 = 2n sum u^2 - 2 (sum u)^2
        const double s1 = u.col(0).sum();
        const double s2 = u.col(0).squaredNorm();
        sum_b2 = 2.0 * dn * s2 - 2.0 * s1 * s1;
        std::tie(sum_r2, grand) = scalar_dist_row_sums(u.col(0));
    } else {
        Vector dist(n);
        for (Index i = 0; i < n; ++i) {
            dist = (u.rowwise() - u.row(i)).rowwise().norm();
            const double r = dist.sum();
            sum_b2 += dist.squaredNorm();
            sum_r2 += r * r;
            grand += r;
        }
    }
    // ||H b H||_F^2 = sum b^2 - (2/n) sum_i r_i^2 + (sum b)^2 / n^2
    const double frob = sum_b2 - 2.0 / dn * sum_r2 + grand * grand / (dn * dn);
    return std::max(frob, 0.0) / (dn * dn);
}

double dvar(const Vector& u) { return dvar(Matrix(u)); }

double tr_var_sq(const Vector& v) {
    if (v.size() < 2)
        throw std::invalid_argument("tr_var_sq: need at least 2 rows");
    detail::require_finite(v, "tr_var_sq input");
    const double var = (v.array() - v.mean()).square().sum() /
                       static_cast<double>(v.size());
    return var * var;
}

double mdc_sq(const Vector& v, const Matrix& u, double eps_den) {
    check_pair(v, u);
    const double tv = tr_var_sq(v);
    if (tv <= eps_den)
        throw DegenerateDenominator("mdc: response variance factor below floor");
    const double dv = dvar(u);
    if (dv <= eps_den)
        throw DegenerateDenominator("mdc: conditioner dvar factor below floor");
    return mdd_sq(v, u) / (std::sqrt(tv) * std::sqrt(dv));
}

double mdc_sq(const Vector& v, const Vector& u, double eps_den) {
    return mdc_sq(v, Matrix(u), eps_den);
}

LaggedPair make_lagged(const Matrix& x, Index response_col,
                       const std::vector<Index>& conditioner_cols, int lag) {
    const Index n = x.rows();
    if (response_col < 0 || response_col >= x.cols())
        throw std::invalid_argument("make_lagged: response column out of range");
    if (conditioner_cols.empty())
        throw std::invalid_argument("make_lagged: empty conditioner set");
    for (Index c : conditioner_cols)
        if (c < 0 || c >= x.cols())
            throw std::invalid_argument("make_lagged: conditioner column out of range");
    if (lag < 0 || lag > n - 2)
        throw std::invalid_argument("make_lagged: lag leaves fewer than 2 rows");
    const Index m = n - lag;
    LaggedPair out;
    out.lag = lag;
    out.response = x.col(response_col).segment(lag, m);
    out.conditioner.resize(m, static_cast<Index>(conditioner_cols.size()));
    for (std::size_t j = 0; j < conditioner_cols.size(); ++j)
        out.conditioner.col(static_cast<Index>(j)) =
            x.col(conditioner_cols[j]).head(m);
    return out;
}

}  // namespace mica
