#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "mica/common.hpp"
#include "mica/ortho.hpp"

namespace mica::detail {

using ValueFn = std::function<double(const Matrix&)>;
using ValueGradFn = std::function<double(const Matrix&, Matrix&)>;

struct DescentOutcome {
    Matrix q;
    double objective = 0.0;
    std::vector<double> trace;
    bool converged = false;
};

// Cayley transform of the skew matrix w applied from the left:
// (I + tau/2 w)^{-1} (I - tau/2 w) q. Returns false when the system is
// singular at this tau.
inline bool cayley_apply(const Matrix& q, const Matrix& w, double tau,
                         Matrix& out) {
    const Index p = q.rows();
    const Matrix lhs = Matrix::Identity(p, p) + 0.5 * tau * w;
    Eigen::FullPivLU<Matrix> lu(lhs);
    if (!lu.isInvertible()) return false;
    out = lu.solve((Matrix::Identity(p, p) - 0.5 * tau * w) * q);
    return true;
}

// Gradient descent on the orthogonal group: steepest-descent Cayley
// retraction (W = G Q' - Q G') with Armijo backtracking from tau = 1,
// halving down to 1e-8. Stops on relative improvement below tol_obj,
// a vanishing manifold gradient, or max_iter.
inline DescentOutcome cayley_descent(Matrix q, const ValueGradFn& fg,
                                     const ValueFn& f, int max_iter,
                                     double tol_obj) {
    constexpr double kArmijo = 1e-4;
    constexpr double kTauMin = 1e-8;
    DescentOutcome out;
    Matrix grad(q.rows(), q.cols());
    double value = fg(q, grad);
    out.trace.push_back(value);
    for (int iter = 0; iter < max_iter; ++iter) {
        const Matrix w = grad * q.transpose() - q * grad.transpose();
        const double w2 = w.squaredNorm();
        if (w2 <= 1e-24 * std::max(1.0, value * value)) {
            out.converged = true;
            break;
        }
        const double slope = -0.5 * w2;
        double tau = 1.0;
        Matrix cand;
        bool accepted = false;
        double cand_value = value;
        while (tau >= kTauMin) {
            if (cayley_apply(q, w, tau, cand)) {
                cand_value = f(cand);
                if (cand_value <= value + kArmijo * tau * slope) {
                    accepted = true;
                    break;
                }
            }
            tau *= 0.5;
        }
        if (!accepted) {
            // No descent at the smallest step: numerically stationary.
            out.converged = true;
            break;
        }
        if (ortho_error(cand) > 1e-10) cand = reorthonormalize(cand);
        q = std::move(cand);
        const double previous = value;
        value = fg(q, grad);
        out.trace.push_back(value);
        const double rel = (previous - value) / std::max(std::abs(previous), 1e-300);
        if (rel < tol_obj) {
            out.converged = true;
            break;
        }
    }
    out.q = std::move(q);
    out.objective = out.trace.back();
    return out;
}

}  // namespace mica::detail
