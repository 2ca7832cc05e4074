#pragma once

// Brent's derivative-free scalar minimization (golden section with
// parabolic interpolation) on a closed interval.

#include <cmath>
#include <utility>

namespace tailblend::math {

struct BrentResult {
    double x = 0.0;
    double fx = 0.0;
    int evaluations = 0;
};

template <class F>
BrentResult brent_minimize(const F& f, double lo, double hi, double x_tol = 1e-7,
                           int max_iter = 200) {
    const double golden = 0.3819660112501051;
    double a = lo, b = hi;
    double x = a + golden * (b - a);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    int evals = 1;
    double delta = 0.0, delta2 = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        double mid = 0.5 * (a + b);
        double tol1 = x_tol * std::fabs(x) + x_tol * 0.25;
        double tol2 = 2.0 * tol1;
        if (std::fabs(x - mid) <= tol2 - 0.5 * (b - a)) break;
        double d = 0.0;
        bool parabolic = false;
        if (std::fabs(delta2) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::fabs(q);
            double td = delta2;
            delta2 = delta;
            if (std::fabs(p) < std::fabs(0.5 * q * td) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (mid - x >= 0.0) ? tol1 : -tol1;
                parabolic = true;
            }
        }
        if (!parabolic) {
            delta2 = (x >= mid) ? a - x : b - x;
            d = golden * delta2;
        }
        delta = d;
        double u = (std::fabs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
        double fu = f(u);
        ++evals;
        if (fu <= fx) {
            if (u >= x) a = x; else b = x;
            v = w; w = x; x = u;
            fv = fw; fw = fx; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; w = u; fv = fw; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx, evals};
}

// Coarse grid scan followed by Brent within the bracketing cell; guards
// against multimodal objectives at negligible extra cost.
template <class F>
BrentResult grid_then_brent(const F& f, double lo, double hi, int grid_points = 32,
                            double x_tol = 1e-7) {
    double best_x = lo, best_f = f(lo);
    int evals = 1;
    for (int i = 1; i < grid_points; ++i) {
        double x = lo + (hi - lo) * i / (grid_points - 1.0);
        double fx = f(x);
        ++evals;
        if (fx < best_f) { best_f = fx; best_x = x; }
    }
    double h = (hi - lo) / (grid_points - 1.0);
    double a = std::max(lo, best_x - h), b = std::min(hi, best_x + h);
    BrentResult r = brent_minimize(f, a, b, x_tol);
    r.evaluations += evals;
    if (best_f < r.fx) { r.x = best_x; r.fx = best_f; }
    return r;
}

} // namespace tailblend::math
