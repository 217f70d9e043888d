#pragma once

// Brute-force reference implementations, written directly from the defining
// formulas and kept independent of the library's evaluation paths. Every
// derived expected value in the test suites comes from these.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mica/common.hpp"
#include "mica/gmica.hpp"
#include "mica/rng.hpp"

namespace oracle {

using mica::Index;
using mica::Matrix;
using mica::Vector;

// -(1/n^2) sum_{i,j} (v_i - vbar)(v_j - vbar) ||u_i - u_j||, plain loops.
inline double mdd(const Vector& v, const Matrix& u) {
    const Index n = v.size();
    const double vbar = v.mean();
    double acc = 0.0;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            acc += (v(i) - vbar) * (v(j) - vbar) * (u.row(i) - u.row(j)).norm();
    return -acc / (static_cast<double>(n) * n);
}

// (1/n^2) sum B_ij^2 with B the explicitly double-centered distance matrix.
inline double dvar(const Matrix& u) {
    const Index n = u.rows();
    Matrix b(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) b(i, j) = (u.row(i) - u.row(j)).norm();
    const Vector rm = b.rowwise().mean();
    const Vector cm = b.colwise().mean();
    const double gm = b.mean();
    double acc = 0.0;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const double centered = b(i, j) - rm(i) - cm(j) + gm;
            acc += centered * centered;
        }
    return acc / (static_cast<double>(n) * n);
}

// tr((1/n^2) sum A_ij^2) with A the double-centered half squared distances.
inline double tr_var_sq(const Vector& v) {
    const Index n = v.size();
    Matrix a(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            a(i, j) = 0.5 * (v(i) - v(j)) * (v(i) - v(j));
    const Vector rm = a.rowwise().mean();
    const Vector cm = a.colwise().mean();
    const double gm = a.mean();
    double acc = 0.0;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const double centered = a(i, j) - rm(i) - cm(j) + gm;
            acc += centered * centered;
        }
    return acc / (static_cast<double>(n) * n);
}

// Lag alignment straight from the definition: response rows h.., conditioner
// rows 0..n-h-1.
inline double lagged_mdd(const Matrix& z, Index resp, Index cond_first,
                         Index cond_count, int h) {
    const Index m = z.rows() - h;
    const Vector v = z.col(resp).segment(h, m);
    const Matrix u = z.block(0, cond_first, m, cond_count);
    return mdd(v, u);
}

// S_h0 re-implemented with sequential accumulation.
inline double objective_s(const Matrix& a, const Matrix& y, int h0) {
    const Index p = a.cols();
    const Matrix z = y * a;
    double acc = 0.0;
    for (int h = 0; h <= h0; ++h)
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j)
                if (i != j) acc += lagged_mdd(z, i, j, 1, h);
    return acc / (a * a.transpose()).trace();
}

// G_h0 for a contiguous group layout.
inline double objective_g(const Matrix& a, const std::vector<int>& sizes,
                          const Matrix& y, int h0) {
    const Matrix z = y * a;
    std::vector<Index> first;
    Index at = 0;
    for (int s : sizes) {
        first.push_back(at);
        at += s;
    }
    double acc = 0.0;
    for (int h = 0; h <= h0; ++h)
        for (std::size_t gi = 0; gi < sizes.size(); ++gi)
            for (int k = 0; k < sizes[gi]; ++k)
                for (std::size_t gj = 0; gj < sizes.size(); ++gj) {
                    if (gi == gj) continue;
                    acc += lagged_mdd(z, first[gi] + k, first[gj], sizes[gj], h);
                }
    return acc / std::sqrt((a * a.transpose()).trace());
}

// Exhaustive signed column matching for p <= 8.
inline double best_alignment_score(const Matrix& b, const Matrix& c) {
    const Index p = b.cols();
    std::vector<Index> perm(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) perm[static_cast<std::size_t>(i)] = i;
    double best = -1.0;
    do {
        double score = 0.0;
        for (Index i = 0; i < p; ++i)
            score += std::abs(b.col(i).dot(c.col(perm[static_cast<std::size_t>(i)])));
        best = std::max(best, score);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Central finite differences of f over the entries of a.
template <typename F>
Matrix fd_gradient(const F& f, const Matrix& a, double step) {
    Matrix g(a.rows(), a.cols());
    Matrix m = a;
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) {
            m(i, j) = a(i, j) + step;
            const double hi = f(m);
            m(i, j) = a(i, j) - step;
            const double lo = f(m);
            m(i, j) = a(i, j);
            g(i, j) = (hi - lo) / (2.0 * step);
        }
    return g;
}

inline Matrix random_matrix(Index rows, Index cols, mica::Rng& rng) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

inline Vector random_vector(Index n, mica::Rng& rng) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

inline double rel_err(double got, double want) {
    const double scale = std::max({std::abs(got), std::abs(want), 1e-14});
    return std::abs(got - want) / scale;
}

}  // namespace oracle
