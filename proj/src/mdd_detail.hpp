#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mica/common.hpp"

namespace mica::detail {

// Sorted view of a scalar conditioner window. The orientation is
// canonicalized (the window is negated when its first non-constant step is
// decreasing) so that mdd evaluation is bit-identical under u -> -u.
struct SortedConditioner {
    std::vector<int> order;   // ascending positions into the window
    std::vector<double> w;    // oriented values in sorted order
    bool flipped = false;
    bool constant = false;
    int n = 0;

    static SortedConditioner build(const double* u, int n) {
        SortedConditioner sc;
        sc.n = n;
        int k = 1;
        while (k < n && u[k] == u[0]) ++k;
        if (k == n) {
            sc.constant = true;
            return sc;
        }
        sc.flipped = u[k] < u[0];
        const double sgn = sc.flipped ? -1.0 : 1.0;
        sc.order.resize(n);
        std::iota(sc.order.begin(), sc.order.end(), 0);
        std::sort(sc.order.begin(), sc.order.end(), [&](int a, int b) {
            const double ua = sgn * u[a], ub = sgn * u[b];
            return ua < ub || (ua == ub && a < b);
        });
        sc.w.resize(n);
        for (int i = 0; i < n; ++i) sc.w[i] = sgn * u[sc.order[i]];
        return sc;
    }
};

// Scratch buffers reused across mdd_sorted calls.
struct MddWorkspace {
    std::vector<double> d;        // centered response in sorted order
    std::vector<double> contrib;  // per-position contributions
    std::vector<double> gc;       // response-side gradient, original order
};

// MDD^2 of response v (window of length sc.n) against the sorted scalar
// conditioner. If grad_v / grad_u are non-null they receive the gradient of
// the value with respect to the raw response and conditioner windows
// (length sc.n, original order); grad_v includes the centering chain rule,
// grad_u the orientation sign.
inline double mdd_sorted(const double* v, const SortedConditioner& sc,
                         MddWorkspace& ws, double* grad_v = nullptr,
                         double* grad_u = nullptr) {
    const int n = sc.n;
    if (sc.constant) {
        if (grad_v) std::fill(grad_v, grad_v + n, 0.0);
        if (grad_u) std::fill(grad_u, grad_u + n, 0.0);
        return 0.0;
    }
    ws.d.resize(n);
    ws.contrib.resize(n);
    for (int i = 0; i < n; ++i) ws.contrib[i] = v[i];
    const double mean = pairwise_sum(ws.contrib) / n;
    for (int k = 0; k < n; ++k) ws.d[k] = v[sc.order[k]] - mean;

    const double inv_n2 = 1.0 / (static_cast<double>(n) * n);
    double pd = 0.0, pdw = 0.0;  // prefix sums of d and d*w
    for (int k = 0; k < n; ++k) {
        ws.contrib[k] = ws.d[k] * (sc.w[k] * pd - pdw);
        pd += ws.d[k];
        pdw += ws.d[k] * sc.w[k];
    }
    const double value = -2.0 * inv_n2 * pairwise_sum(ws.contrib);

    if (grad_v) {
        // d(value)/d(c_s) = -(2/n^2) sum_t c_t |u_s - u_t|, then center.
        const double full_d = pd, full_dw = pdw;
        ws.gc.resize(n);
        double a = 0.0, q = 0.0;
        for (int k = 0; k < n; ++k) {
            const double below = sc.w[k] * a - q;
            const double above =
                (full_dw - q - ws.d[k] * sc.w[k]) - sc.w[k] * (full_d - a - ws.d[k]);
            ws.gc[sc.order[k]] = -2.0 * inv_n2 * (below + above);
            a += ws.d[k];
            q += ws.d[k] * sc.w[k];
        }
        double gsum = 0.0;
        for (int i = 0; i < n; ++i) gsum += ws.gc[i];
        const double gmean = gsum / n;
        for (int i = 0; i < n; ++i) grad_v[i] = ws.gc[i] - gmean;
    }
    if (grad_u) {
        // d(value)/d(u_s) = -(2/n^2) c_s (sum_{u_t < u_s} c_t - sum_{u_t > u_s} c_t),
        // with ties contributing zero; runs of equal w are handled jointly.
        const double sgn = sc.flipped ? -1.0 : 1.0;
        const double full_d = pd;
        double lo = 0.0;
        int k = 0;
        while (k < n) {
            int e = k;
            double run = 0.0;
            while (e < n && sc.w[e] == sc.w[k]) run += ws.d[e++];
            const double hi = full_d - lo - run;
            for (int j = k; j < e; ++j)
                grad_u[sc.order[j]] = sgn * (-2.0 * inv_n2) * ws.d[j] * (lo - hi);
            lo += run;
            k = e;
        }
    }
    return value;
}

}  // namespace mica::detail
