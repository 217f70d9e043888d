#include "mica/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "descent.hpp"
#include "mdd_detail.hpp"
#include "parallel.hpp"

namespace mica {

namespace {

void check_series(const Matrix& y, int h0) {
    if (y.rows() < 2 || y.cols() < 1)
        throw std::invalid_argument("series: need n >= 2 rows and p >= 1 columns");
    detail::require_finite(y, "series");
    if (h0 < 0) throw std::invalid_argument("h0 must be >= 0");
    if (y.rows() <= h0 + 2)
        throw std::invalid_argument("series too short for the requested h0");
}

void check_components_nonconstant(const Matrix& z) {
    for (Index c = 0; c < z.cols(); ++c) {
        const double lo = z.col(c).minCoeff();
        const double hi = z.col(c).maxCoeff();
        if (hi - lo <= 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi))))
            throw DegenerateProjection("objective: projected component " +
                                       std::to_string(c) + " is constant");
    }
}

// Sum of the collected MDD terms, made order-independent by sorting the
// values before the pairwise reduction (signed column permutations then
// reproduce bit-identical objective values).
double reduce_terms(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    return pairwise_sum(terms);
}

double objective_s_impl(const Matrix& a, const Matrix& y, int h0,
                        Matrix* grad) {
    check_series(y, h0);
    const Index p = y.cols();
    const Index n = y.rows();
    if (a.rows() != p || a.cols() != p)
        throw std::invalid_argument("objective_s: matrix shape mismatch");
    detail::require_finite(a, "objective_s matrix");
    if (p == 1) {
        if (grad) grad->setZero(1, 1);
        return 0.0;
    }
    const Matrix z = y * a;
    check_components_nonconstant(z);

    Matrix dz;
    std::vector<double> gv, gu;
    if (grad) {
        dz.setZero(n, p);
        gv.resize(static_cast<std::size_t>(n));
        gu.resize(static_cast<std::size_t>(n));
    }
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>((h0 + 1) * p * (p - 1)));
    detail::MddWorkspace ws;
    for (int h = 0; h <= h0; ++h) {
        const Index m = n - h;
        for (Index j = 0; j < p; ++j) {
            const auto sc = detail::SortedConditioner::build(
                z.col(j).data(), static_cast<int>(m));
            for (Index i = 0; i < p; ++i) {
                if (i == j) continue;
                const double* v = z.col(i).data() + h;
                const double t = detail::mdd_sorted(
                    v, sc, ws, grad ? gv.data() : nullptr,
                    grad ? gu.data() : nullptr);
                terms.push_back(t);
                if (grad) {
                    dz.col(i).segment(h, m) +=
                        Eigen::Map<const Vector>(gv.data(), m);
                    dz.col(j).head(m) += Eigen::Map<const Vector>(gu.data(), m);
                }
            }
        }
    }
    const double total = reduce_terms(terms);
    const double tau = a.squaredNorm();
    if (grad) {
        *grad = (y.transpose() * dz) / tau;
        grad->noalias() -= (2.0 * total / (tau * tau)) * a;
    }
    return total / tau;
}

}  // namespace

double objective_s(const Matrix& a_tilde, const Matrix& y, int h0) {
    return objective_s_impl(a_tilde, y, h0, nullptr);
}

double objective_s_with_grad(const Matrix& a_tilde, const Matrix& y, int h0,
                             Matrix& grad) {
    return objective_s_impl(a_tilde, y, h0, &grad);
}

void MicaConfig::validate() const {
    if (h0 < 1) throw std::invalid_argument("MicaConfig: h0 must be >= 1");
    if (n_starts < 1)
        throw std::invalid_argument("MicaConfig: n_starts must be >= 1");
    if (max_iter < 1)
        throw std::invalid_argument("MicaConfig: max_iter must be >= 1");
    if (!(tol_obj > 0.0) || !(fd_step > 0.0))
        throw std::invalid_argument("MicaConfig: tolerances must be > 0");
}

namespace detail {

Matrix latin_hypercube_angles(int n_points, int dim, std::uint64_t seed) {
    Rng rng(seed);
    Matrix pts(n_points, std::max(dim, 1));
    std::vector<int> perm(static_cast<std::size_t>(n_points));
    for (int d = 0; d < dim; ++d) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int k = n_points - 1; k > 0; --k) {
            const auto r = static_cast<int>(
                rng.uniform_int(static_cast<std::uint64_t>(k) + 1));
            std::swap(perm[static_cast<std::size_t>(k)],
                      perm[static_cast<std::size_t>(r)]);
        }
        for (int k = 0; k < n_points; ++k)
            pts(k, d) = (perm[static_cast<std::size_t>(k)] + rng.uniform()) *
                        std::numbers::pi / n_points;
    }
    return pts;
}

}  // namespace detail

namespace {

// Cyclic Givens coordinate descent on S_h0. Each pass visits every column
// pair (i, j) and minimizes the one-angle slice theta -> S(Q Gamma_ij(theta))
// globally (coarse grid plus golden-section refinement); a rotation of the
// pair only touches the terms where i or j enters, so slices are evaluated
// incrementally against a cached term table.
class GivensSweeper {
public:
    GivensSweeper(const Matrix& y, int h0, Matrix q)
        : y_(y), h0_(h0), p_(y.cols()), n_(y.rows()), q_(std::move(q)) {
        rebuild();
    }

    const Matrix& q() const { return q_; }

    // One full sweep; returns the canonical objective after it.
    double sweep() {
        for (Index i = 0; i < p_; ++i)
            for (Index j = i + 1; j < p_; ++j) visit_pair(i, j);
        if (detail::ortho_error(q_) > 1e-10) q_ = detail::reorthonormalize(q_);
        rebuild();
        return objective_s(q_, y_, h0_);
    }

private:
    void rebuild() {
        z_ = y_ * q_;
        conds_.assign(static_cast<std::size_t>(h0_ + 1), {});
        terms_.assign(static_cast<std::size_t>(h0_ + 1), Matrix::Zero(p_, p_));
        for (int h = 0; h <= h0_; ++h) {
            auto& per_col = conds_[static_cast<std::size_t>(h)];
            per_col.reserve(static_cast<std::size_t>(p_));
            for (Index c = 0; c < p_; ++c)
                per_col.push_back(detail::SortedConditioner::build(
                    z_.col(c).data(), static_cast<int>(n_ - h)));
            for (Index c = 0; c < p_; ++c)
                for (Index r = 0; r < p_; ++r)
                    if (r != c)
                        terms_[static_cast<std::size_t>(h)](r, c) =
                            detail::mdd_sorted(z_.col(r).data() + h,
                                               per_col[static_cast<std::size_t>(c)],
                                               ws_);
        }
    }

    // Sum of the terms that move when columns i and j rotate.
    double affected_current(Index i, Index j) const {
        double acc = 0.0;
        for (const auto& t : terms_) {
            acc += t.row(i).sum() + t.row(j).sum();
            acc += t.col(i).sum() + t.col(j).sum();
            acc -= t(i, j) + t(j, i);  // counted twice above
        }
        return acc;
    }

    double affected_at(Index i, Index j, double theta) {
        const double c = std::cos(theta), s = std::sin(theta);
        zi_ = c * z_.col(i) - s * z_.col(j);
        zj_ = s * z_.col(i) + c * z_.col(j);
        double acc = 0.0;
        for (int h = 0; h <= h0_; ++h) {
            const Index m = n_ - h;
            const auto& per_col = conds_[static_cast<std::size_t>(h)];
            const auto sci = detail::SortedConditioner::build(zi_.data(),
                                                              static_cast<int>(m));
            const auto scj = detail::SortedConditioner::build(zj_.data(),
                                                              static_cast<int>(m));
            // responses i and j against every conditioner
            for (Index cnd = 0; cnd < p_; ++cnd) {
                if (cnd != i)
                    acc += detail::mdd_sorted(
                        zi_.data() + h,
                        cnd == j ? scj : per_col[static_cast<std::size_t>(cnd)],
                        ws_);
                if (cnd != j)
                    acc += detail::mdd_sorted(
                        zj_.data() + h,
                        cnd == i ? sci : per_col[static_cast<std::size_t>(cnd)],
                        ws_);
            }
            // remaining responses against conditioners i and j
            for (Index r = 0; r < p_; ++r) {
                if (r == i || r == j) continue;
                acc += detail::mdd_sorted(z_.col(r).data() + h, sci, ws_);
                acc += detail::mdd_sorted(z_.col(r).data() + h, scj, ws_);
            }
        }
        return acc;
    }

    void visit_pair(Index i, Index j) {
        const double base = affected_current(i, j);
        auto slice = [&](double theta) { return affected_at(i, j, theta); };
        constexpr int kGrid = 12;
        double best_theta = 0.0, best_value = base;
        for (int k = 1; k < kGrid; ++k) {
            const double theta = std::numbers::pi * k / kGrid;
            const double v = slice(theta);
            if (v < best_value) {
                best_value = v;
                best_theta = theta;
            }
        }
        // golden-section refinement around the best grid point
        constexpr double kGolden = 0.6180339887498949;
        double lo = best_theta - std::numbers::pi / kGrid;
        double hi = best_theta + std::numbers::pi / kGrid;
        double x1 = hi - kGolden * (hi - lo);
        double x2 = lo + kGolden * (hi - lo);
        double f1 = slice(x1), f2 = slice(x2);
        for (int it = 0; it < 24; ++it) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - kGolden * (hi - lo);
                f1 = slice(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + kGolden * (hi - lo);
                f2 = slice(x2);
            }
        }
        const double cand = f1 <= f2 ? x1 : x2;
        const double cand_value = std::min(f1, f2);
        if (std::min(cand_value, best_value) >= base) return;
        const double theta = cand_value < best_value ? cand : best_theta;
        apply_rotation(i, j, theta);
    }

    void apply_rotation(Index i, Index j, double theta) {
        const double c = std::cos(theta), s = std::sin(theta);
        const Vector qi = q_.col(i), qj = q_.col(j);
        q_.col(i) = c * qi - s * qj;
        q_.col(j) = s * qi + c * qj;
        const Vector zi = z_.col(i), zj = z_.col(j);
        z_.col(i) = c * zi - s * zj;
        z_.col(j) = s * zi + c * zj;
        for (int h = 0; h <= h0_; ++h) {
            auto& per_col = conds_[static_cast<std::size_t>(h)];
            auto& t = terms_[static_cast<std::size_t>(h)];
            per_col[static_cast<std::size_t>(i)] = detail::SortedConditioner::build(
                z_.col(i).data(), static_cast<int>(n_ - h));
            per_col[static_cast<std::size_t>(j)] = detail::SortedConditioner::build(
                z_.col(j).data(), static_cast<int>(n_ - h));
            for (Index r = 0; r < p_; ++r)
                for (Index cnd : {i, j})
                    if (r != cnd)
                        t(r, cnd) = detail::mdd_sorted(
                            z_.col(r).data() + h,
                            per_col[static_cast<std::size_t>(cnd)], ws_);
            for (Index r : {i, j})
                for (Index cnd = 0; cnd < p_; ++cnd)
                    if (r != cnd)
                        t(r, cnd) = detail::mdd_sorted(
                            z_.col(r).data() + h,
                            per_col[static_cast<std::size_t>(cnd)], ws_);
        }
    }

    const Matrix& y_;
    int h0_;
    Index p_, n_;
    Matrix q_, z_;
    Vector zi_, zj_;
    std::vector<std::vector<detail::SortedConditioner>> conds_;
    std::vector<Matrix> terms_;
    detail::MddWorkspace ws_;
};

}  // namespace

EstimationResult estimate_mica(const Matrix& y, const MicaConfig& cfg) {
    cfg.validate();
    check_series(y, cfg.h0);
    const Index p = y.cols();
    const Index n = y.rows();

    std::vector<std::string> warnings;
    if (n < 10 * p)
        warnings.push_back("sample size " + std::to_string(n) +
                           " is below 10*p; estimates may be unstable");

    if (p == 1) {
        EstimationResult out{OrthoMatrix::from(Matrix::Identity(1, 1)),
                             y,
                             0.0,
                             0,
                             {0.0},
                             true,
                             std::move(warnings)};
        return out;
    }

    const int dim = static_cast<int>(p * (p - 1) / 2);
    const Matrix starts =
        detail::latin_hypercube_angles(cfg.n_starts, dim, cfg.seed);
    std::vector<double> values(static_cast<std::size_t>(cfg.n_starts));
    detail::parallel_for_indexed(
        static_cast<std::size_t>(cfg.n_starts), cfg.n_workers,
        [&](std::size_t k) {
            const OrthoMatrix q =
                givens_compose(starts.row(static_cast<Index>(k)).transpose());
            values[k] = objective_s(q.mat(), y, cfg.h0);
        });
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] < values[best]) best = k;

    // Stage 1: Givens coordinate sweeps with per-angle global line search
    // (escapes the spurious local minima that trap plain gradient descent).
    const OrthoMatrix q0 =
        givens_compose(starts.row(static_cast<Index>(best)).transpose());
    std::vector<double> trace{values[best]};
    bool sweeps_converged = false;
    GivensSweeper sweeper(y, cfg.h0, q0.mat());
    double current = values[best];
    for (int pass = 0; pass < cfg.max_iter; ++pass) {
        const double after = sweeper.sweep();
        trace.push_back(after);
        const double rel = (current - after) / std::max(std::abs(current), 1e-300);
        current = after;
        if (rel < cfg.tol_obj) {
            sweeps_converged = true;
            break;
        }
    }

    // Stage 2: Cayley-retraction polish from the sweep result.
    auto outcome = detail::cayley_descent(
        sweeper.q(),
        [&](const Matrix& q, Matrix& g) {
            return objective_s_with_grad(q, y, cfg.h0, g);
        },
        [&](const Matrix& q) { return objective_s(q, y, cfg.h0); },
        cfg.max_iter, cfg.tol_obj);
    trace.insert(trace.end(), outcome.trace.begin() + 1, outcome.trace.end());

    OrthoMatrix a_hat = OrthoMatrix::from(std::move(outcome.q));
    Matrix components = y * a_hat.mat();
    return EstimationResult{std::move(a_hat),
                            std::move(components),
                            outcome.objective,
                            static_cast<int>(best),
                            std::move(trace),
                            sweeps_converged && outcome.converged,
                            std::move(warnings)};
}

namespace {

// Unit vector from hyperspherical coordinates; dim(angles) = r - 1.
Vector sphere_point(const Eigen::Ref<const Vector>& angles) {
    const Index d = angles.size();
    Vector w(d + 1);
    double run = 1.0;
    for (Index i = 0; i < d; ++i) {
        w(i) = run * std::cos(angles(i));
        run *= std::sin(angles(i));
    }
    w(d) = run;
    return w;
}

// Per-column stage of the sequential estimator. The candidate column is
// a = N w with w on the unit sphere of the complement coordinates P = Y N;
// the remainder R is the complement of w inside those coordinates. All
// pair geometry is precomputed once: squared distances E of the rows of P
// and double-centered Gram windows of P per lag.
class SequentialStage {
public:
    SequentialStage(const Matrix& p_coords, int h0)
        : p_(p_coords), h0_(h0), n_(p_coords.rows()) {
        e_.resize(n_, n_);
        e_.setZero();
        for (Index i = 0; i < n_; ++i) {
            for (Index j = i + 1; j < n_; ++j) {
                const double d2 = (p_.row(i) - p_.row(j)).squaredNorm();
                e_(i, j) = d2;
                e_(j, i) = d2;
            }
        }
        const Matrix gram = p_ * p_.transpose();
        cg_.reserve(static_cast<std::size_t>(h0 + 1));
        for (int h = 0; h <= h0; ++h) {
            const Index m = n_ - h;
            Matrix g = gram.block(h, h, m, m);
            const Vector rm = g.rowwise().mean();
            const double gm = rm.mean();
            g.colwise() -= rm;
            g.rowwise() -= rm.transpose();
            g.array() += gm;
            cg_.push_back(std::move(g));
        }
    }

    double eval(const Vector& w, Vector* grad_w) const {
        const Vector s = p_ * w;
        Vector gs;
        if (grad_w) gs.setZero(n_);
        double value = 0.0;
        Vector c, fdc, fa, rac, rk;
        for (int h = 0; h <= h0_; ++h) {
            const Index m = n_ - h;
            const double inv2 = 2.0 / (static_cast<double>(m) * m);
            c = s.segment(h, m);
            c.array() -= c.mean();
            const Matrix& cg = cg_[static_cast<std::size_t>(h)];
            double acc_fwd = 0.0, acc_rev = 0.0;
            if (grad_w) {
                fdc.setZero(m);
                fa.setZero(m);
                rac.setZero(m);
                rk.setZero(m);
            }
            for (Index i = 0; i < m; ++i) {
                const double si = s(i), ci = c(i);
                for (Index j = i + 1; j < m; ++j) {
                    const double du = si - s(j);
                    const double e = e_(i, j) - du * du;
                    const double d = e > 0.0 ? std::sqrt(e) : 0.0;
                    const double a = std::abs(du);
                    const double cc = ci * c(j);
                    const double k = cg(i, j) - cc;
                    acc_fwd += cc * d;
                    acc_rev += k * a;
                    if (grad_w) {
                        fdc(i) += c(j) * d;
                        fdc(j) += ci * d;
                        rac(i) += c(j) * a;
                        rac(j) += ci * a;
                        if (du != 0.0) {
                            const double sgn = du > 0.0 ? 1.0 : -1.0;
                            rk(i) += k * sgn;
                            rk(j) -= k * sgn;
                            if (d > 0.0) {
                                fa(i) += c(j) * du / d;
                                fa(j) -= ci * du / d;
                            }
                        }
                    }
                }
            }
            value += -inv2 * acc_fwd - inv2 * acc_rev;
            if (grad_w) {
                // forward response (centered chain) and rev response
                Vector resp = (-inv2) * fdc + inv2 * rac;
                resp.array() -= resp.mean();
                gs.segment(h, m) += resp;
                // conditioner sides
                gs.head(m) += inv2 * c.cwiseProduct(fa) - inv2 * rk;
            }
        }
        if (grad_w) *grad_w = p_.transpose() * gs;
        return value;
    }

private:
    const Matrix& p_;
    int h0_;
    Index n_;
    Matrix e_;
    std::vector<Matrix> cg_;
};

// Riemannian descent on the unit sphere with normalization retraction.
struct SphereOutcome {
    Vector w;
    double value = 0.0;
    bool converged = false;
};

SphereOutcome sphere_descent(Vector w, const SequentialStage& stage,
                             int max_iter, double tol_obj) {
    constexpr double kArmijo = 1e-4;
    constexpr double kTauMin = 1e-8;
    SphereOutcome out;
    Vector grad(w.size());
    double value = stage.eval(w, &grad);
    for (int iter = 0; iter < max_iter; ++iter) {
        Vector rgrad = grad - grad.dot(w) * w;
        const double g2 = rgrad.squaredNorm();
        if (g2 <= 1e-24 * std::max(1.0, value * value)) {
            out.converged = true;
            break;
        }
        double tau = 1.0;
        bool accepted = false;
        Vector cand;
        double cand_value = value;
        while (tau >= kTauMin) {
            cand = (w - tau * rgrad).normalized();
            cand_value = stage.eval(cand, nullptr);
            if (cand_value <= value - kArmijo * tau * g2) {
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) {
            out.converged = true;
            break;
        }
        w = std::move(cand);
        const double previous = value;
        value = stage.eval(w, &grad);
        if ((previous - value) / std::max(std::abs(previous), 1e-300) <
            tol_obj) {
            out.converged = true;
            break;
        }
    }
    out.w = std::move(w);
    out.value = value;
    return out;
}

}  // namespace

EstimationResult estimate_mica_sequential(const Matrix& y,
                                          const MicaConfig& cfg) {
    cfg.validate();
    check_series(y, cfg.h0);
    const Index p = y.cols();
    if (p < 3) return estimate_mica(y, cfg);
    const Index n = y.rows();

    std::vector<std::string> warnings;
    if (n < 10 * p)
        warnings.push_back("sample size " + std::to_string(n) +
                           " is below 10*p; estimates may be unstable");

    // Multi-start budget per column; the joint estimator spends cfg.n_starts
    // full-objective evaluations, so the per-stage budget is scaled down.
    const int stage_starts =
        std::max(16, cfg.n_starts / static_cast<int>(p));

    Matrix a(p, p);
    Matrix basis = Matrix::Identity(p, p);  // complement of fixed columns
    bool all_converged = true;
    for (Index k = 0; k + 1 < p; ++k) {
        const Index r = p - k;
        const Matrix coords = y * basis;
        SequentialStage stage(coords, cfg.h0);

        const Matrix starts = detail::latin_hypercube_angles(
            stage_starts, static_cast<int>(r - 1),
            cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k + 1));
        Index best = 0;
        double best_value = std::numeric_limits<double>::infinity();
        Vector w;
        for (Index i = 0; i < starts.rows(); ++i) {
            w = sphere_point(starts.row(i).head(r - 1).transpose());
            const double v = stage.eval(w, nullptr);
            if (v < best_value) {
                best_value = v;
                best = i;
            }
        }
        w = sphere_point(starts.row(best).head(r - 1).transpose());
        auto refined = sphere_descent(std::move(w), stage, cfg.max_iter,
                                      cfg.tol_obj);
        all_converged = all_converged && refined.converged;

        a.col(k) = basis * refined.w;
        // Householder complement of w inside the current coordinates.
        const double sigma = refined.w(0) >= 0.0 ? 1.0 : -1.0;
        Vector u = refined.w;
        u(0) += sigma;
        const Matrix house = Matrix::Identity(r, r) -
                             (2.0 / u.squaredNorm()) * (u * u.transpose());
        basis = (basis * house.rightCols(r - 1)).eval();
    }
    a.col(p - 1) = basis.col(0);
    if (detail::ortho_error(a) > 1e-10) a = detail::reorthonormalize(a);

    OrthoMatrix a_hat = OrthoMatrix::from(std::move(a));
    Matrix components = y * a_hat.mat();
    const double objective = objective_s(a_hat.mat(), y, cfg.h0);
    return EstimationResult{std::move(a_hat),
                            std::move(components),
                            objective,
                            0,
                            {objective},
                            all_converged,
                            std::move(warnings)};
}

}  // namespace mica
