#include "mica/ortho.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mica {

namespace detail {

double ortho_error(const Matrix& q) {
    return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols()))
        .cwiseAbs()
        .maxCoeff();
}

Matrix reorthonormalize(const Matrix& q) {
    Eigen::HouseholderQR<Matrix> qr(q);
    Matrix out = qr.householderQ() * Matrix::Identity(q.rows(), q.cols());
    const Matrix r = qr.matrixQR().topRows(q.cols()).triangularView<Eigen::Upper>();
    for (Index k = 0; k < q.cols(); ++k)
        if (r(k, k) < 0.0) out.col(k) = -out.col(k);
    return out;
}

}  // namespace detail

OrthoMatrix OrthoMatrix::from(Matrix q) {
    if (q.rows() != q.cols() || q.rows() < 1)
        throw std::invalid_argument("OrthoMatrix: expected a square matrix");
    detail::require_finite(q, "OrthoMatrix");
    const double err = detail::ortho_error(q);
    if (err > 1e-6)
        throw std::invalid_argument("OrthoMatrix: input is not orthogonal");
    if (err > 1e-8) q = detail::reorthonormalize(q);
    return OrthoMatrix(std::move(q));
}

SemiOrthoBlock SemiOrthoBlock::from(Matrix b) {
    if (b.rows() < 1 || b.cols() < 1 || b.cols() > b.rows())
        throw std::invalid_argument("SemiOrthoBlock: invalid shape");
    detail::require_finite(b, "SemiOrthoBlock");
    const double err = detail::ortho_error(b);
    if (err > 1e-6)
        throw std::invalid_argument("SemiOrthoBlock: columns not orthonormal");
    if (err > 1e-8) b = detail::reorthonormalize(b);
    return SemiOrthoBlock(std::move(b));
}

OrthoMatrix givens_compose(const Vector& angles) {
    detail::require_finite(angles, "givens_compose angles");
    const Index m = angles.size();
    Index p = 1;
    while (p * (p - 1) / 2 < m) ++p;
    if (p * (p - 1) / 2 != m)
        throw std::invalid_argument("givens_compose: angle count is not p(p-1)/2");
    Matrix q = Matrix::Identity(p, p);
    Index k = 0;
    for (Index i = 0; i < p; ++i) {
        for (Index j = i + 1; j < p; ++j, ++k) {
            const double c = std::cos(angles(k));
            const double s = std::sin(angles(k));
            // q <- q * Gamma_ij: only columns i and j change.
            for (Index r = 0; r < p; ++r) {
                const double qi = q(r, i), qj = q(r, j);
                q(r, i) = qi * c - qj * s;
                q(r, j) = qi * s + qj * c;
            }
        }
    }
    return OrthoMatrix::from(std::move(q));
}

OrthoMatrix haar_random(Index p, Rng& rng) {
    if (p < 1) throw std::invalid_argument("haar_random: p must be >= 1");
    Matrix g(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(p, p);
    const Matrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    for (Index k = 0; k < p; ++k)
        if (r(k, k) < 0.0) q.col(k) = -q.col(k);
    return OrthoMatrix::from(std::move(q));
}

OrthoMatrix haar_random(Index p, std::uint64_t seed) {
    Rng rng(seed);
    return haar_random(p, rng);
}

OrthoMatrix cayley_step(const OrthoMatrix& q, const Matrix& euclid_grad,
                        double tau) {
    const Index p = q.dim();
    if (euclid_grad.rows() != p || euclid_grad.cols() != p)
        throw std::invalid_argument("cayley_step: gradient shape mismatch");
    if (!(tau > 0.0)) throw std::invalid_argument("cayley_step: tau must be > 0");
    detail::require_finite(euclid_grad, "cayley_step gradient");
    const Matrix w =
        euclid_grad * q.mat().transpose() - q.mat() * euclid_grad.transpose();
    const Matrix lhs = Matrix::Identity(p, p) + 0.5 * tau * w;
    Eigen::FullPivLU<Matrix> lu(lhs);
    if (!lu.isInvertible())
        throw SingularCayleyStep("cayley_step: step size too large");
    const Matrix rhs = (Matrix::Identity(p, p) - 0.5 * tau * w) * q.mat();
    Matrix out = lu.solve(rhs);
    if (detail::ortho_error(out) > 1e-10) out = detail::reorthonormalize(out);
    return OrthoMatrix::from(std::move(out));
}

std::vector<Index> solve_assignment_max(const Matrix& score) {
    const Index n = score.rows();
    if (score.cols() != n || n < 1)
        throw std::invalid_argument("solve_assignment_max: square matrix required");
    // Hungarian method with potentials on the negated score, O(n^3).
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<Index> match(n + 1, 0), way(n + 1, 0);
    for (Index i = 1; i <= n; ++i) {
        match[0] = i;
        Index j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const Index i0 = match[j0];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const Index j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<Index> row_to_col(n);
    for (Index j = 1; j <= n; ++j)
        if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

Alignment align_columns(const OrthoMatrix& b, const OrthoMatrix& c) {
    if (b.dim() != c.dim())
        throw std::invalid_argument("align_columns: dimension mismatch");
    const Index p = b.dim();
    const Matrix inner = b.mat().transpose() * c.mat();
    const Matrix score = inner.cwiseAbs();
    Alignment out;
    out.permutation = solve_assignment_max(score);
    out.signs.resize(static_cast<std::size_t>(p));
    double total = 0.0;
    for (Index i = 0; i < p; ++i) {
        const Index j = out.permutation[static_cast<std::size_t>(i)];
        out.signs[static_cast<std::size_t>(i)] = inner(i, j) < 0.0 ? -1 : 1;
        total += score(i, j);
    }
    out.score = total;
    return out;
}

double d_distance_scaled(const OrthoMatrix& b, const OrthoMatrix& c) {
    const Alignment a = align_columns(b, c);
    const double p = static_cast<double>(b.dim());
    return std::clamp(1.0 - a.score / p, 0.0, 1.0);
}

double dtilde_distance_scaled(const std::vector<SemiOrthoBlock>& b_blocks,
                              const std::vector<SemiOrthoBlock>& c_blocks) {
    const std::size_t m = b_blocks.size();
    if (m == 0 || c_blocks.size() != m)
        throw std::invalid_argument("dtilde: block count mismatch");
    std::vector<Index> b_sizes, c_sizes;
    for (const auto& blk : b_blocks) b_sizes.push_back(blk.cols());
    for (const auto& blk : c_blocks) c_sizes.push_back(blk.cols());
    {
        auto bs = b_sizes, cs = c_sizes;
        std::sort(bs.begin(), bs.end());
        std::sort(cs.begin(), cs.end());
        if (bs != cs)
            throw std::invalid_argument("dtilde: group size multisets differ");
    }
    for (std::size_t i = 1; i < m; ++i)
        if (b_blocks[i].rows() != b_blocks[0].rows() ||
            c_blocks[i].rows() != c_blocks[0].rows() ||
            b_blocks[0].rows() != c_blocks[0].rows())
            throw std::invalid_argument("dtilde: ambient dimension mismatch");

    // Blocks can only be matched within their size class; solve one
    // assignment per class, maximizing tr(B B' C C') = ||B'C||_F^2.
    double worst = 0.0;
    std::vector<Index> classes(b_sizes);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    for (Index size : classes) {
        std::vector<std::size_t> bi, ci;
        for (std::size_t i = 0; i < m; ++i) {
            if (b_sizes[i] == size) bi.push_back(i);
            if (c_sizes[i] == size) ci.push_back(i);
        }
        const Index k = static_cast<Index>(bi.size());
        Matrix score(k, k);
        for (Index a = 0; a < k; ++a)
            for (Index b2 = 0; b2 < k; ++b2)
                score(a, b2) = (b_blocks[bi[static_cast<std::size_t>(a)]]
                                    .mat()
                                    .transpose() *
                                c_blocks[ci[static_cast<std::size_t>(b2)]].mat())
                                   .squaredNorm();
        const auto assign = solve_assignment_max(score);
        for (Index a = 0; a < k; ++a) {
            const double tr = score(a, assign[static_cast<std::size_t>(a)]);
            const double d2 = 1.0 - tr / static_cast<double>(size);
            worst = std::max(worst, std::clamp(d2, 0.0, 1.0));
        }
    }
    return worst;
}

}  // namespace mica
