#pragma once

// Scalar special functions used across the library: normal/t/gamma
// distribution kernels, regularized incomplete gamma/beta, digamma,
// trigamma and the first Debye function.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tailblend/math/quadrature.hpp"

namespace tailblend::math {

inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// standard normal
// ---------------------------------------------------------------------------

inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double norm_logpdf(double x) {
    return -0.5 * x * x - 0.5 * std::log(2.0 * pi);
}

inline double norm_pdf(double x) { return std::exp(norm_logpdf(x)); }

// Acklam's rational approximation refined by one Halley step; accurate to
// full double precision away from the extreme denormal range.
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("norm_quantile: p outside [0,1]");
    }
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement
    double e = norm_cdf(x) - p;
    double u = e * std::sqrt(2.0 * pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

// ---------------------------------------------------------------------------
// gamma family
// ---------------------------------------------------------------------------

// Regularized lower incomplete gamma P(a,x); series for x < a+1, continued
// fraction otherwise.
inline double gamma_p(double a, double x) {
    if (a <= 0.0) throw std::domain_error("gamma_p: a <= 0");
    if (x < 0.0) throw std::domain_error("gamma_p: x < 0");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ++ap;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Lentz continued fraction for Q(a,x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

// Inverse of gamma_p in x for fixed shape: bracketing + Newton, |dx| tol 1e-12
// relative. Wilson-Hilferty start.
inline double gamma_p_inv(double a, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("gamma_p_inv: p outside [0,1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    double x;
    {
        double g = norm_quantile(p);
        double t = 1.0 - 1.0 / (9.0 * a) + g / (3.0 * std::sqrt(a));
        x = a * t * t * t;
        if (!(x > 0.0)) x = a * std::exp((std::log(p) + std::lgamma(a + 1.0)) / a);
        if (!(x > 0.0) || !std::isfinite(x)) x = 0.5 * a;
    }
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    const double lg = std::lgamma(a);
    for (int it = 0; it < 200; ++it) {
        double f = gamma_p(a, x) - p;
        if (f > 0.0) hi = x; else lo = x;
        double logpdf = -x + (a - 1.0) * std::log(x) - lg;
        double step = f / std::exp(logpdf);
        double xn = x - step;
        if (!(xn > lo && (xn < hi))) xn = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * x;
        if (std::fabs(xn - x) <= 1e-12 * (std::fabs(xn) + 1e-300)) { x = xn; break; }
        x = xn;
    }
    return x;
}

// Gamma(shape, rate) parametrization throughout.
inline double gamma_logpdf(double y, double shape, double rate) {
    if (y <= 0.0) return -std::numeric_limits<double>::infinity();
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(y) - rate * y;
}

inline double gamma_cdf(double y, double shape, double rate) {
    if (y <= 0.0) return 0.0;
    return gamma_p(shape, rate * y);
}

inline double gamma_quantile(double p, double shape, double rate) {
    return gamma_p_inv(shape, p) / rate;
}

// ---------------------------------------------------------------------------
// regularized incomplete beta and Student t
// ---------------------------------------------------------------------------

namespace detail {
inline double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h;
}
} // namespace detail

inline double inc_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw std::domain_error("inc_beta: a,b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    double front = std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - lbeta) * detail::betacf(b, a, 1.0 - x) / b;
}

inline double t_cdf(double x, double df) {
    if (df <= 0.0) throw std::domain_error("t_cdf: df <= 0");
    if (x == 0.0) return 0.5;
    double p = 0.5 * inc_beta(0.5 * df, 0.5, df / (df + x * x));
    return x > 0.0 ? 1.0 - p : p;
}

inline double t_logpdf(double x, double df) {
    return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
           0.5 * std::log(df * pi) - 0.5 * (df + 1.0) * std::log1p(x * x / df);
}

// Quantile via bracketed Newton on t_cdf.
inline double t_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("t_quantile: p outside [0,1]");
    }
    if (p == 0.5) return 0.0;
    // normal start, inflated for heavy tails
    double x = norm_quantile(p);
    x *= std::sqrt(df / std::max(df - 2.0, 0.5));
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        double f = t_cdf(x, df) - p;
        if (f > 0.0) hi = x; else lo = x;
        double step = f / std::exp(t_logpdf(x, df));
        double xn = x - step;
        if (!(xn > lo && xn < hi) || !std::isfinite(xn)) {
            if (std::isfinite(lo) && std::isfinite(hi)) xn = 0.5 * (lo + hi);
            else xn = (f > 0.0) ? x - 1.0 - std::fabs(x) : x + 1.0 + std::fabs(x);
        }
        if (std::fabs(xn - x) <= 1e-13 * (std::fabs(xn) + 1.0)) { x = xn; break; }
        x = xn;
    }
    return x;
}

// ---------------------------------------------------------------------------
// digamma / trigamma (asymptotic series after upward recurrence)
// ---------------------------------------------------------------------------

inline double digamma(double x) {
    if (x <= 0.0) throw std::domain_error("digamma: x <= 0");
    double r = 0.0;
    while (x < 12.0) {
        r -= 1.0 / x;
        x += 1.0;
    }
    double f = 1.0 / (x * x);
    return r + std::log(x) - 0.5 / x -
           f * (1.0 / 12.0 - f * (1.0 / 120.0 - f * (1.0 / 252.0 - f * (1.0 / 240.0 - f / 132.0))));
}

inline double trigamma(double x) {
    if (x <= 0.0) throw std::domain_error("trigamma: x <= 0");
    double r = 0.0;
    while (x < 12.0) {
        r += 1.0 / (x * x);
        x += 1.0;
    }
    double f = 1.0 / (x * x);
    return r + 1.0 / x + 0.5 * f +
           f / x * (1.0 / 6.0 - f * (1.0 / 30.0 - f * (1.0 / 42.0 - f * (1.0 / 30.0 - f * 5.0 / 66.0))));
}

// ---------------------------------------------------------------------------
// Debye function D1
// ---------------------------------------------------------------------------

// D1(x) = (1/x) * integral_0^x t/(e^t - 1) dt to 1e-10 relative accuracy.
// The integrand t/expm1(t) is analytic with limit 1 at t = 0, and
// D1(-x) = D1(x) + x/2.
inline double debye1(double x) {
    if (x == 0.0) return 1.0;
    if (x < 0.0) return debye1(-x) - 0.5 * x;
    auto f = [](double t) { return t < 1e-8 ? 1.0 - 0.5 * t : t / std::expm1(t); };
    double upper = std::min(x, 700.0); // integrand underflows past that
    double val = integrate(f, 0.0, upper, 1e-12 * std::max(1.0, upper));
    return val / x;
}

} // namespace tailblend::math
