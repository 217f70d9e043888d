#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mica/common.hpp"
#include "mica/estimator.hpp"
#include "mica/ortho.hpp"

namespace mica {

/// Ordered partition (p_1, ..., p_m) of the p components plus the
/// column-to-group map.
struct GroupStructure {
    std::vector<int> sizes;
    std::vector<int> assignment;  // component index -> group index

    int p() const { return static_cast<int>(assignment.size()); }
    int m() const { return static_cast<int>(sizes.size()); }

    /// Columns of each group are consecutive and groups appear in order.
    bool is_contiguous() const;

    void validate(Index p_expected) const;

    static GroupStructure singletons(Index p);
    /// Groups laid out contiguously in the given order.
    static GroupStructure contiguous(std::vector<int> sizes);
    static GroupStructure from_assignment(std::vector<int> assignment);
};

/// Symmetric matrix of pairwise mean-dependence statistics
/// M(i,j) = max over lags and both orderings of the sample MDC^2 between
/// components i and j. Degenerate (constant-factor) evaluations enter as 0.
struct PairStatMatrix {
    Matrix m_hat;
    int degenerate_evals = 0;
};

struct Gmica1Result {
    OrthoMatrix a_hat;  // columns permuted so groups are contiguous
    Matrix components;
    GroupStructure groups;
    int r_hat = 0;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    std::vector<std::string> warnings;
};

/// G_h0(A) = (1/tr(AA'))^{1/2} sum_{h=0..h0} sum_i sum_{k in group i}
///           sum_{j != i} MDD^2((A_i)_k' y_t | A_j' y_{t-h}).
double objective_g(const Matrix& a_tilde, const GroupStructure& groups,
                   const Matrix& y, int h0);
double objective_g_with_grad(const Matrix& a_tilde,
                             const GroupStructure& groups, const Matrix& y,
                             int h0, Matrix& grad);

/// Minimizes G_h0 for a known group structure by block-coordinate descent:
/// blocks are cycled, each updated by a Cayley step over the rotations that
/// mix that block with the rest. Without an explicit initializer the warm
/// start is the MICA estimate with its columns routed to groups by maximal
/// within-group pair-statistic mass; with one, groups.assignment describes
/// the initializer's columns. With m = 1 the initializer is returned
/// unchanged.
EstimationResult estimate_gmica_known(
    const Matrix& y, const GroupStructure& groups, const MicaConfig& cfg,
    const std::optional<Matrix>& init = std::nullopt);

/// M(i,j) statistics of estimated components, symmetric by construction.
PairStatMatrix pair_stats(const Matrix& x_hat, int h0);

/// Ratio-based count of significantly mean-dependent pairs:
/// argmax_{1<=j<=floor(c0 p0)} M_(j) / M_(j+1) over the descending order
/// statistics. Zero denominators count as +inf (smallest such j wins); an
/// all-zero matrix (max below 1e-10) yields 0.
int estimate_r(const PairStatMatrix& stats, double c0 = 0.75);

/// Connected components of the graph whose edges are the r_hat largest
/// M(i,j) (cutoff ties broken lexicographically). Groups are ordered by
/// descending size, then smallest member index.
GroupStructure group_from_graph(const PairStatMatrix& stats, int r_hat);

struct Algorithm1Options {
    double c0 = 0.75;
    double eps_frob = 1e-4;  // Frobenius tolerance after column alignment
    int max_outer = 10;
};

/// Full iteration for an unknown group structure: MICA initialization, then
/// repeated {pair stats, ratio estimate, graph grouping, grouped
/// re-estimation} until the structure repeats and consecutive estimates
/// agree in Frobenius norm, or max_outer is reached.
Gmica1Result algorithm1(const Matrix& y, const MicaConfig& cfg,
                        const Algorithm1Options& opts = {});

namespace detail {

/// Partition columns into groups of the given sizes maximizing the total
/// within-group mass of the pair-statistic matrix (exhaustive for small
/// problems, greedy beyond).
std::vector<int> route_columns(const Matrix& m_hat,
                               const std::vector<int>& sizes);

}  // namespace detail

}  // namespace mica
