#include "mica/gmica.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "descent.hpp"
#include "mica/mdd.hpp"

namespace mica {

namespace {

struct UnionFind {
    std::vector<int> parent, rank_;
    explicit UnionFind(int n) : parent(n), rank_(n, 0) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }
};

struct PairEntry {
    double value;
    int i, j;
};

// Descending by value, lexicographic (i, j) on ties.
std::vector<PairEntry> sorted_pairs(const Matrix& m_hat) {
    const int p = static_cast<int>(m_hat.rows());
    std::vector<PairEntry> pairs;
    pairs.reserve(static_cast<std::size_t>(p * (p - 1) / 2));
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            pairs.push_back({m_hat(i, j), i, j});
    std::sort(pairs.begin(), pairs.end(), [](const PairEntry& a, const PairEntry& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    return pairs;
}

}  // namespace

bool GroupStructure::is_contiguous() const {
    int seen = 0, g = 0;
    for (int a : assignment) {
        if (a != g) {
            if (a != g + 1 || seen != sizes[static_cast<std::size_t>(g)])
                return false;
            ++g;
            seen = 0;
        }
        ++seen;
    }
    return g == m() - 1 && seen == sizes.back();
}

void GroupStructure::validate(Index p_expected) const {
    if (sizes.empty()) throw std::invalid_argument("GroupStructure: no groups");
    int total = 0;
    for (int s : sizes) {
        if (s < 1) throw std::invalid_argument("GroupStructure: size < 1");
        total += s;
    }
    if (total != static_cast<int>(p_expected))
        throw std::invalid_argument("GroupStructure: sizes do not sum to p");
    if (assignment.size() != static_cast<std::size_t>(p_expected))
        throw std::invalid_argument("GroupStructure: assignment length mismatch");
    std::vector<int> counts(sizes.size(), 0);
    for (int a : assignment) {
        if (a < 0 || a >= m())
            throw std::invalid_argument("GroupStructure: group index out of range");
        ++counts[static_cast<std::size_t>(a)];
    }
    for (std::size_t g = 0; g < sizes.size(); ++g)
        if (counts[g] != sizes[g])
            throw std::invalid_argument(
                "GroupStructure: assignment inconsistent with sizes");
}

GroupStructure GroupStructure::singletons(Index p) {
    GroupStructure g;
    g.sizes.assign(static_cast<std::size_t>(p), 1);
    g.assignment.resize(static_cast<std::size_t>(p));
    std::iota(g.assignment.begin(), g.assignment.end(), 0);
    return g;
}

GroupStructure GroupStructure::contiguous(std::vector<int> sizes) {
    GroupStructure g;
    g.sizes = std::move(sizes);
    for (std::size_t i = 0; i < g.sizes.size(); ++i)
        g.assignment.insert(g.assignment.end(),
                            static_cast<std::size_t>(g.sizes[i]),
                            static_cast<int>(i));
    return g;
}

GroupStructure GroupStructure::from_assignment(std::vector<int> assignment) {
    GroupStructure g;
    g.assignment = std::move(assignment);
    int m = 0;
    for (int a : g.assignment) m = std::max(m, a + 1);
    g.sizes.assign(static_cast<std::size_t>(m), 0);
    for (int a : g.assignment) {
        if (a < 0) throw std::invalid_argument("GroupStructure: negative group");
        ++g.sizes[static_cast<std::size_t>(a)];
    }
    g.validate(static_cast<Index>(g.assignment.size()));
    return g;
}

namespace {

double objective_g_impl(const Matrix& a, const GroupStructure& groups,
                        const Matrix& y, int h0, Matrix* grad) {
    const Index p = y.cols();
    const Index n = y.rows();
    groups.validate(p);
    if (a.rows() != p || a.cols() != p)
        throw std::invalid_argument("objective_g: matrix shape mismatch");
    detail::require_finite(a, "objective_g matrix");
    if (y.rows() <= h0 + 2 || h0 < 0)
        throw std::invalid_argument("objective_g: series too short for h0");
    const int m = groups.m();
    if (m == 1) {
        if (grad) grad->setZero(p, p);
        return 0.0;
    }
    const Matrix z = y * a;
    for (Index c = 0; c < p; ++c) {
        const double lo = z.col(c).minCoeff(), hi = z.col(c).maxCoeff();
        if (hi - lo <= 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi))))
            throw DegenerateProjection("objective_g: projected component " +
                                       std::to_string(c) + " is constant");
    }

    std::vector<std::vector<Index>> cols(static_cast<std::size_t>(m));
    for (Index c = 0; c < p; ++c)
        cols[static_cast<std::size_t>(groups.assignment[static_cast<std::size_t>(c)])]
            .push_back(c);

    // Full pairwise row-distance matrix per conditioner group.
    std::vector<Matrix> dist(static_cast<std::size_t>(m));
    for (int g = 0; g < m; ++g) {
        const auto& gc = cols[static_cast<std::size_t>(g)];
        Matrix& d = dist[static_cast<std::size_t>(g)];
        d.setZero(n, n);
        if (gc.size() == 1) {
            const auto col = z.col(gc[0]);
            for (Index i = 0; i < n; ++i)
                for (Index j = i + 1; j < n; ++j) {
                    const double v = std::abs(col(i) - col(j));
                    d(i, j) = v;
                    d(j, i) = v;
                }
        } else {
            Matrix u(n, static_cast<Index>(gc.size()));
            for (std::size_t k = 0; k < gc.size(); ++k)
                u.col(static_cast<Index>(k)) = z.col(gc[k]);
            for (Index i = 0; i < n; ++i)
                for (Index j = i + 1; j < n; ++j) {
                    const double v = (u.row(i) - u.row(j)).norm();
                    d(i, j) = v;
                    d(j, i) = v;
                }
        }
    }

    Matrix dz;
    if (grad) dz.setZero(n, p);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>((h0 + 1) * p * (m - 1)));
    Matrix cmat, dc, rrt, mmat, umat, gu;
    for (int h = 0; h <= h0; ++h) {
        const Index nh = n - h;
        const double inv_n2 = 1.0 / (static_cast<double>(nh) * nh);
        for (int j = 0; j < m; ++j) {
            const auto& jc = cols[static_cast<std::size_t>(j)];
            const auto dv = dist[static_cast<std::size_t>(j)].topLeftCorner(nh, nh);
            // centered responses: every column outside group j
            std::vector<Index> rcols;
            for (int g = 0; g < m; ++g)
                if (g != j)
                    for (Index c : cols[static_cast<std::size_t>(g)])
                        rcols.push_back(c);
            const Index kk = static_cast<Index>(rcols.size());
            cmat.resize(nh, kk);
            for (Index k = 0; k < kk; ++k) {
                cmat.col(k) = z.col(rcols[static_cast<std::size_t>(k)]).segment(h, nh);
                cmat.col(k).array() -= cmat.col(k).mean();
            }
            dc.noalias() = dv * cmat;
            for (Index k = 0; k < kk; ++k)
                terms.push_back(-inv_n2 * cmat.col(k).dot(dc.col(k)));
            if (grad) {
                for (Index k = 0; k < kk; ++k) {
                    Vector g = (-2.0 * inv_n2) * dc.col(k);
                    g.array() -= g.mean();
                    dz.col(rcols[static_cast<std::size_t>(k)]).segment(h, nh) += g;
                }
                rrt.noalias() = cmat * cmat.transpose();
                mmat.resize(nh, nh);
                for (Index i = 0; i < nh; ++i) {
                    mmat(i, i) = 0.0;
                    for (Index j2 = i + 1; j2 < nh; ++j2) {
                        const double d = dv(i, j2);
                        const double v = d > 0.0 ? rrt(i, j2) / d : 0.0;
                        mmat(i, j2) = v;
                        mmat(j2, i) = v;
                    }
                }
                umat.resize(nh, static_cast<Index>(jc.size()));
                for (std::size_t k = 0; k < jc.size(); ++k)
                    umat.col(static_cast<Index>(k)) = z.col(jc[k]).head(nh);
                const Vector rowsum = mmat.rowwise().sum();
                gu.noalias() = mmat * umat;
                gu = (-2.0 * inv_n2) *
                     (umat.array().colwise() * rowsum.array()).matrix() +
                     (2.0 * inv_n2) * gu;
                for (std::size_t k = 0; k < jc.size(); ++k)
                    dz.col(jc[k]).head(nh) += gu.col(static_cast<Index>(k));
            }
        }
    }
    std::sort(terms.begin(), terms.end());
    const double total = pairwise_sum(terms);
    const double tau = a.squaredNorm();
    const double root = std::sqrt(tau);
    if (grad) {
        *grad = (y.transpose() * dz) / root;
        grad->noalias() -= (total / (tau * root)) * a;
    }
    return total / root;
}

}  // namespace

double objective_g(const Matrix& a_tilde, const GroupStructure& groups,
                   const Matrix& y, int h0) {
    return objective_g_impl(a_tilde, groups, y, h0, nullptr);
}

double objective_g_with_grad(const Matrix& a_tilde,
                             const GroupStructure& groups, const Matrix& y,
                             int h0, Matrix& grad) {
    return objective_g_impl(a_tilde, groups, y, h0, &grad);
}

PairStatMatrix pair_stats(const Matrix& x_hat, int h0) {
    const Index p = x_hat.cols();
    const Index n = x_hat.rows();
    if (p < 1 || n <= h0 + 2)
        throw std::invalid_argument("pair_stats: series too short for h0");
    detail::require_finite(x_hat, "pair_stats input");
    PairStatMatrix out;
    out.m_hat.setZero(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = i + 1; j < p; ++j) {
            double best = 0.0;
            for (int h = 0; h <= h0; ++h) {
                const Index m = n - h;
                for (int dir = 0; dir < 2; ++dir) {
                    const Index ri = dir == 0 ? i : j;
                    const Index ci = dir == 0 ? j : i;
                    const Vector resp = x_hat.col(ri).segment(h, m);
                    const Vector cond = x_hat.col(ci).head(m);
                    try {
                        best = std::max(best, mdc_sq(resp, cond));
                    } catch (const DegenerateDenominator&) {
                        ++out.degenerate_evals;
                    }
                }
            }
            out.m_hat(i, j) = best;
            out.m_hat(j, i) = best;
        }
    }
    return out;
}

int estimate_r(const PairStatMatrix& stats, double c0) {
    const int p = static_cast<int>(stats.m_hat.rows());
    const int p0 = p * (p - 1) / 2;
    if (p0 < 2)
        throw std::invalid_argument("estimate_r: need p(p-1)/2 >= 2 pairs");
    if (!(c0 > 0.0) || c0 > 1.0)
        throw std::invalid_argument("estimate_r: c0 must be in (0, 1]");
    const auto pairs = sorted_pairs(stats.m_hat);
    if (pairs.front().value < 1e-10) return 0;
    const int jmax = std::min(p0 - 1, static_cast<int>(std::floor(c0 * p0)));
    int best_j = 1;
    double best_ratio = -1.0;
    for (int j = 1; j <= jmax; ++j) {
        const double num = pairs[static_cast<std::size_t>(j - 1)].value;
        const double den = pairs[static_cast<std::size_t>(j)].value;
        double ratio;
        if (den > 0.0)
            ratio = num / den;
        else
            ratio = num > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_j = j;
        }
    }
    return best_j;
}

GroupStructure group_from_graph(const PairStatMatrix& stats, int r_hat) {
    const int p = static_cast<int>(stats.m_hat.rows());
    const int p0 = p * (p - 1) / 2;
    if (r_hat < 0 || r_hat > p0)
        throw std::invalid_argument("group_from_graph: r_hat out of range");
    const auto pairs = sorted_pairs(stats.m_hat);
    UnionFind uf(p);
    for (int k = 0; k < r_hat; ++k)
        uf.unite(pairs[static_cast<std::size_t>(k)].i,
                 pairs[static_cast<std::size_t>(k)].j);

    std::vector<std::vector<int>> members;
    std::vector<int> root_of(static_cast<std::size_t>(p), -1);
    for (int c = 0; c < p; ++c) {
        const int r = uf.find(c);
        if (root_of[static_cast<std::size_t>(r)] < 0) {
            root_of[static_cast<std::size_t>(r)] = static_cast<int>(members.size());
            members.emplace_back();
        }
        members[static_cast<std::size_t>(root_of[static_cast<std::size_t>(r)])]
            .push_back(c);
    }
    // descending size, then smallest member index
    std::sort(members.begin(), members.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                  if (a.size() != b.size()) return a.size() > b.size();
                  return a.front() < b.front();
              });
    GroupStructure g;
    g.assignment.resize(static_cast<std::size_t>(p));
    for (std::size_t gi = 0; gi < members.size(); ++gi) {
        g.sizes.push_back(static_cast<int>(members[gi].size()));
        for (int c : members[gi])
            g.assignment[static_cast<std::size_t>(c)] = static_cast<int>(gi);
    }
    return g;
}

namespace detail {

namespace {

void route_recurse(const Matrix& m_hat, const std::vector<int>& sizes,
                   std::vector<std::vector<int>>& groups, int col,
                   double mass, double& best_mass, std::vector<int>& best) {
    const int p = static_cast<int>(m_hat.rows());
    if (col == p) {
        if (mass > best_mass) {
            best_mass = mass;
            best.assign(static_cast<std::size_t>(p), 0);
            for (std::size_t g = 0; g < groups.size(); ++g)
                for (int c : groups[g]) best[static_cast<std::size_t>(c)] =
                    static_cast<int>(g);
        }
        return;
    }
    bool tried_empty_of_size[64] = {};
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (static_cast<int>(groups[g].size()) >= sizes[g]) continue;
        if (groups[g].empty()) {
            // identical empty groups are interchangeable; try one per size
            const int s = sizes[g];
            if (s < 64 && tried_empty_of_size[s]) continue;
            if (s < 64) tried_empty_of_size[s] = true;
        }
        double added = 0.0;
        for (int c : groups[g]) added += m_hat(c, col);
        groups[g].push_back(col);
        route_recurse(m_hat, sizes, groups, col + 1, mass + added, best_mass,
                      best);
        groups[g].pop_back();
    }
}

std::size_t partition_count(int p, const std::vector<int>& sizes) {
    // multinomial coefficient, saturating
    long double count = 1.0L;
    int left = p;
    for (int s : sizes) {
        for (int k = 0; k < s; ++k) count *= static_cast<long double>(left - k);
        for (int k = 2; k <= s; ++k) count /= static_cast<long double>(k);
        left -= s;
        if (count > 1e18L) return std::numeric_limits<std::size_t>::max();
    }
    return static_cast<std::size_t>(count);
}

}  // namespace

std::vector<int> route_columns(const Matrix& m_hat,
                               const std::vector<int>& sizes) {
    const int p = static_cast<int>(m_hat.rows());
    int total = 0;
    for (int s : sizes) total += s;
    if (total != p)
        throw std::invalid_argument("route_columns: sizes do not sum to p");
    if (partition_count(p, sizes) <= 500000) {
        std::vector<std::vector<int>> groups(sizes.size());
        std::vector<int> best;
        double best_mass = -1.0;
        route_recurse(m_hat, sizes, groups, 0, 0.0, best_mass, best);
        return best;
    }
    // Greedy fallback for large p: place columns by descending total mass,
    // each into the group (with free capacity) that gains the most.
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> strength(static_cast<std::size_t>(p), 0.0);
    for (int c = 0; c < p; ++c)
        strength[static_cast<std::size_t>(c)] = m_hat.row(c).sum();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (strength[static_cast<std::size_t>(a)] !=
            strength[static_cast<std::size_t>(b)])
            return strength[static_cast<std::size_t>(a)] >
                   strength[static_cast<std::size_t>(b)];
        return a < b;
    });
    std::vector<std::vector<int>> groups(sizes.size());
    std::vector<int> out(static_cast<std::size_t>(p), 0);
    for (int c : order) {
        int best_g = -1;
        double best_gain = -1.0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (static_cast<int>(groups[g].size()) >= sizes[g]) continue;
            double gain = 0.0;
            for (int o : groups[g]) gain += m_hat(o, c);
            if (gain > best_gain) {
                best_gain = gain;
                best_g = static_cast<int>(g);
            }
        }
        groups[static_cast<std::size_t>(best_g)].push_back(c);
        out[static_cast<std::size_t>(c)] = best_g;
    }
    return out;
}

}  // namespace detail

namespace {

// One block-coordinate pass structure for the grouped objective: cycles the
// blocks, each updated by a right-acting Cayley rotation restricted to the
// plane pairs that mix the block with the rest.
struct BlockDescentOutcome {
    Matrix q;
    double objective = 0.0;
    std::vector<double> trace;
    bool converged = false;
};

BlockDescentOutcome optimize_gmica_blocks(const Matrix& y,
                                          const GroupStructure& groups,
                                          Matrix q, const MicaConfig& cfg) {
    constexpr double kArmijo = 1e-4;
    constexpr double kTauMin = 1e-8;
    const Index p = y.cols();
    const int m = groups.m();
    BlockDescentOutcome out;
    Matrix grad(p, p);
    double value = objective_g_with_grad(q, groups, y, cfg.h0, grad);
    out.trace.push_back(value);
    if (m == 1) {
        out.q = std::move(q);
        out.objective = value;
        out.converged = true;
        return out;
    }
    std::vector<double> tau_warm(static_cast<std::size_t>(m), 1.0);
    bool fresh_grad = true;
    for (int cycle = 0; cycle < cfg.max_iter; ++cycle) {
        const double cycle_start = value;
        for (int b = 0; b < m; ++b) {
            if (!fresh_grad) value = objective_g_with_grad(q, groups, y, cfg.h0, grad);
            fresh_grad = false;
            const Matrix h = q.transpose() * grad;
            Matrix w = h - h.transpose();
            for (Index r = 0; r < p; ++r)
                for (Index c = 0; c < p; ++c) {
                    const bool rin =
                        groups.assignment[static_cast<std::size_t>(r)] == b;
                    const bool cin =
                        groups.assignment[static_cast<std::size_t>(c)] == b;
                    if (rin == cin) w(r, c) = 0.0;
                }
            const double w2 = w.squaredNorm();
            if (w2 <= 1e-24 * std::max(1.0, value * value)) {
                fresh_grad = true;
                continue;
            }
            const double slope = -0.5 * w2;
            double tau = tau_warm[static_cast<std::size_t>(b)];
            bool accepted = false;
            Matrix v, cand;
            double cand_value = value;
            while (tau >= kTauMin) {
                if (detail::cayley_apply(Matrix::Identity(p, p), w, tau, v)) {
                    cand = q * v;
                    cand_value = objective_g(cand, groups, y, cfg.h0);
                    if (cand_value <= value + kArmijo * tau * slope) {
                        accepted = true;
                        break;
                    }
                }
                tau *= 0.5;
            }
            if (accepted) {
                if (detail::ortho_error(cand) > 1e-10)
                    cand = detail::reorthonormalize(cand);
                q = std::move(cand);
                value = cand_value;
                tau_warm[static_cast<std::size_t>(b)] = std::min(tau * 2.0, 16.0);
            } else {
                tau_warm[static_cast<std::size_t>(b)] = 1.0;
                fresh_grad = true;  // q unchanged, gradient still valid
            }
        }
        out.trace.push_back(value);
        const double rel =
            (cycle_start - value) / std::max(std::abs(cycle_start), 1e-300);
        if (rel < cfg.tol_obj) {
            out.converged = true;
            break;
        }
    }
    out.q = std::move(q);
    out.objective = out.trace.back();
    return out;
}

Matrix permute_columns_contiguous(const Matrix& q,
                                  const std::vector<int>& assignment, int m) {
    Matrix out(q.rows(), q.cols());
    Index next = 0;
    for (int g = 0; g < m; ++g)
        for (Index c = 0; c < q.cols(); ++c)
            if (assignment[static_cast<std::size_t>(c)] == g)
                out.col(next++) = q.col(c);
    return out;
}

}  // namespace

EstimationResult estimate_gmica_known(const Matrix& y,
                                      const GroupStructure& groups,
                                      const MicaConfig& cfg,
                                      const std::optional<Matrix>& init) {
    cfg.validate();
    const Index p = y.cols();
    std::vector<std::string> warnings;
    Matrix q0;
    if (init.has_value()) {
        groups.validate(p);
        q0 = permute_columns_contiguous(OrthoMatrix::from(*init).mat(),
                                        groups.assignment, groups.m());
    } else {
        int total = 0;
        for (int s : groups.sizes) total += s;
        if (total != static_cast<int>(p))
            throw std::invalid_argument(
                "estimate_gmica_known: sizes do not sum to p");
        EstimationResult mica = estimate_mica(y, cfg);
        warnings = std::move(mica.warnings);
        const PairStatMatrix stats = pair_stats(mica.components, cfg.h0);
        const std::vector<int> routed =
            detail::route_columns(stats.m_hat, groups.sizes);
        q0 = permute_columns_contiguous(mica.a_hat.mat(), routed, groups.m());
    }
    const GroupStructure contiguous = GroupStructure::contiguous(groups.sizes);
    auto outcome = optimize_gmica_blocks(y, contiguous, std::move(q0), cfg);
    OrthoMatrix a_hat = OrthoMatrix::from(std::move(outcome.q));
    Matrix components = y * a_hat.mat();
    return EstimationResult{std::move(a_hat),
                            std::move(components),
                            outcome.objective,
                            0,
                            std::move(outcome.trace),
                            outcome.converged,
                            std::move(warnings)};
}

Gmica1Result algorithm1(const Matrix& y, const MicaConfig& cfg,
                        const Algorithm1Options& opts) {
    cfg.validate();
    if (!(opts.c0 > 0.0) || opts.c0 > 1.0 || !(opts.eps_frob > 0.0) ||
        opts.max_outer < 1)
        throw std::invalid_argument("algorithm1: invalid options");
    const Index p = y.cols();

    EstimationResult initial = estimate_mica(y, cfg);
    std::vector<std::string> warnings = std::move(initial.warnings);
    if (p == 1) {
        return Gmica1Result{std::move(initial.a_hat),
                            std::move(initial.components),
                            GroupStructure::singletons(1),
                            0,
                            0,
                            true,
                            0.0,
                            std::move(warnings)};
    }

    Matrix q = initial.a_hat.mat();
    std::vector<int> prev_sizes(static_cast<std::size_t>(p), 1);
    Matrix prev_q = q;
    GroupStructure current = GroupStructure::singletons(p);
    int r_hat = 0;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        const Matrix x = y * q;
        const PairStatMatrix stats = pair_stats(x, cfg.h0);
        const int r = p >= 3 ? estimate_r(stats, opts.c0) : 0;
        const GroupStructure g = group_from_graph(stats, r);
        const Matrix qp = permute_columns_contiguous(q, g.assignment, g.m());
        const GroupStructure contiguous = GroupStructure::contiguous(g.sizes);
        auto step6 = optimize_gmica_blocks(y, contiguous, qp, cfg);

        iterations = outer;
        r_hat = r;
        current = contiguous;
        objective = step6.objective;

        const bool same_structure = g.sizes == prev_sizes;
        const Alignment align = align_columns(OrthoMatrix::from(prev_q),
                                              OrthoMatrix::from(step6.q));
        Matrix aligned(p, p);
        for (Index i = 0; i < p; ++i)
            aligned.col(i) =
                static_cast<double>(align.signs[static_cast<std::size_t>(i)]) *
                step6.q.col(align.permutation[static_cast<std::size_t>(i)]);
        const double frob = (aligned - prev_q).norm();

        prev_sizes = g.sizes;
        prev_q = step6.q;
        q = std::move(step6.q);
        if (same_structure && frob < opts.eps_frob) {
            converged = true;
            break;
        }
    }

    OrthoMatrix a_hat = OrthoMatrix::from(std::move(q));
    Matrix components = y * a_hat.mat();
    return Gmica1Result{std::move(a_hat),   std::move(components),
                        std::move(current), r_hat,
                        iterations,         converged,
                        objective,          std::move(warnings)};
}

}  // namespace mica
