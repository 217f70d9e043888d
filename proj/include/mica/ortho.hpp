#pragma once

#include <cstdint>
#include <vector>

#include "mica/common.hpp"
#include "mica/rng.hpp"

namespace mica {

/// A p x p orthogonal matrix. Construction checks ||Q'Q - I||_max: values
/// at or below 1e-8 are accepted as-is, drift up to 1e-6 is repaired by QR
/// re-orthonormalization, anything worse is rejected.
class OrthoMatrix {
public:
    static OrthoMatrix from(Matrix q);

    const Matrix& mat() const { return m_; }
    Index dim() const { return m_.rows(); }

private:
    explicit OrthoMatrix(Matrix q) : m_(std::move(q)) {}
    Matrix m_;
};

/// A p x p_i matrix with orthonormal columns (one group block).
class SemiOrthoBlock {
public:
    static SemiOrthoBlock from(Matrix b);

    const Matrix& mat() const { return m_; }
    Index rows() const { return m_.rows(); }
    Index cols() const { return m_.cols(); }

private:
    explicit SemiOrthoBlock(Matrix b) : m_(std::move(b)) {}
    Matrix m_;
};

/// Column alignment of one orthogonal matrix against another: c's column
/// perm[i], scaled by sign[i], is the match for b's column i. score is the
/// attained sum of absolute matched inner products.
struct Alignment {
    std::vector<Index> permutation;
    std::vector<int> signs;
    double score = 0.0;
};

/// Product of plane rotations over the fixed lexicographic order
/// (1,2),(1,3),...,(p-1,p), left to right. Each factor is the identity with
/// cos(theta) at (i,i),(j,j), sin(theta) at (i,j) and -sin(theta) at (j,i).
/// The angle count p(p-1)/2 determines p.
OrthoMatrix givens_compose(const Vector& angles);

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// the k-th column of Q scaled by sign(R_kk).
OrthoMatrix haar_random(Index p, std::uint64_t seed);
OrthoMatrix haar_random(Index p, Rng& rng);

/// One Cayley retraction step: with W = G Q' - Q G', returns
/// (I + tau/2 W)^{-1} (I - tau/2 W) Q. Throws SingularCayleyStep when the
/// system is singular (caller halves tau).
OrthoMatrix cayley_step(const OrthoMatrix& q, const Matrix& euclid_grad,
                        double tau);

/// Globally optimal signed column matching (Hungarian assignment on
/// |B'C|), maximizing the sum of absolute matched inner products.
Alignment align_columns(const OrthoMatrix& b, const OrthoMatrix& c);

/// Scaled D^2 in [0,1]: 1 - (1/p) sum_i |B_i' C_perm(i)| after alignment.
/// Zero iff c equals b up to a signed column permutation.
double d_distance_scaled(const OrthoMatrix& b, const OrthoMatrix& c);

/// Scaled block-span distance: blocks are matched by optimal assignment
/// among size-compatible pairs (maximizing tr(B B' C C')), and the result is
/// max_i (1 - (1/p_i) tr(B_i B_i' C_i C_i')) over the aligned pairs.
double dtilde_distance_scaled(const std::vector<SemiOrthoBlock>& b_blocks,
                              const std::vector<SemiOrthoBlock>& c_blocks);

/// Hungarian method: returns the column assigned to each row, maximizing the
/// total score of a square matrix.
std::vector<Index> solve_assignment_max(const Matrix& score);

namespace detail {

/// QR-based re-orthonormalization with R-diagonal sign correction (keeps the
/// result close to the input for near-orthogonal matrices).
Matrix reorthonormalize(const Matrix& q);

double ortho_error(const Matrix& q);

}  // namespace detail

}  // namespace mica
