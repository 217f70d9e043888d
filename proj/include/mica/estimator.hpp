#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mica/common.hpp"
#include "mica/ortho.hpp"

namespace mica {

struct MicaConfig {
    int h0 = 1;            // maximum lag in the objective
    int n_starts = 200;    // Latin hypercube multi-start count
    int max_iter = 500;    // optimizer iteration cap
    double tol_obj = 1e-8; // relative objective-improvement stopping rule
    double fd_step = 1e-6; // finite-difference step (gradient cross-checks)
    std::uint64_t seed = 0;
    int n_workers = 1;     // parallelism for multi-start evaluation

    void validate() const;
};

struct EstimationResult {
    OrthoMatrix a_hat;
    Matrix components;          // rows x_t' = (A_hat' y_t)'
    double objective = 0.0;
    int start_index = 0;        // which multi-start point won
    std::vector<double> trace;  // accepted objective values, first = start
    bool converged = false;
    std::vector<std::string> warnings;
};

/// S_h0(A) = (1/tr(AA')) sum_{h=0..h0} sum_i sum_{j != i}
///           MDD^2(A_i' y_t | A_j' y_{t-h}), each lag-h term on the n-h
/// aligned rows. tr(AA') is evaluated literally so near-orthogonal inputs
/// are scored consistently.
double objective_s(const Matrix& a_tilde, const Matrix& y, int h0);

/// Same value plus its Euclidean gradient with respect to the entries of
/// a_tilde.
double objective_s_with_grad(const Matrix& a_tilde, const Matrix& y, int h0,
                             Matrix& grad);

/// Multi-start minimization of S_h0 over the orthogonal group: Latin
/// hypercube sample of cfg.n_starts Givens-angle vectors over [0, pi), best
/// start refined by Cayley-retraction descent with Armijo backtracking.
EstimationResult estimate_mica(const Matrix& y, const MicaConfig& cfg);

/// Deflation variant for larger p: columns are estimated one at a time
/// inside the orthogonal complement of the columns already fixed, each
/// minimizing the lagged mean-dependence between that component and the
/// complement-projected remainder. Falls back to estimate_mica for p < 3.
EstimationResult estimate_mica_sequential(const Matrix& y,
                                          const MicaConfig& cfg);

namespace detail {

/// Latin hypercube sample: n_points rows in [0, pi)^dim, one stratum per
/// point and dimension, deterministic for a fixed seed.
Matrix latin_hypercube_angles(int n_points, int dim, std::uint64_t seed);

}  // namespace detail

}  // namespace mica
