#pragma once

// Closed-form bivariate copula mathematics for the nine-member model pool:
// Joe, Gumbel, Clayton (each plain or 180-degree rotated), Frank, Gaussian
// and Student t. CDFs, log-densities, conditional CDFs (h-functions),
// analytic tail dependence coefficients and Kendall's tau.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "tailblend/math/brent.hpp"
#include "tailblend/math/quadrature.hpp"
#include "tailblend/math/special.hpp"

namespace tailblend {

enum class Family { joe, gumbel, clayton, frank, gaussian, student_t };

struct TdcPair {
    double lower = 0.0;
    double upper = 0.0;
};

// One parametric copula: family tag, dependence parameter, degrees of
// freedom (Student t only) and the survival-rotation flag.
struct CopulaSpec {
    Family family = Family::gumbel;
    double theta = 1.0;
    std::optional<double> df{};
    bool rotated180 = false;
};

inline const char* family_name(Family f) {
    switch (f) {
        case Family::joe: return "joe";
        case Family::gumbel: return "gumbel";
        case Family::clayton: return "clayton";
        case Family::frank: return "frank";
        case Family::gaussian: return "gaussian";
        case Family::student_t: return "t";
    }
    return "?";
}

inline std::string spec_name(const CopulaSpec& s) {
    std::string n = family_name(s.family);
    if (s.rotated180) n = "survival_" + n;
    return n;
}

inline int copula_param_count(Family f) { return f == Family::student_t ? 2 : 1; }

// Frank and Gaussian are radially symmetric; rotating them yields an
// equivalent copula.
inline bool rotation_invariant(Family f) {
    return f == Family::frank || f == Family::gaussian || f == Family::student_t;
}

inline void validate(const CopulaSpec& s) {
    const double th = s.theta;
    auto fail = [&](const char* msg) {
        throw std::invalid_argument(std::string("copula ") + spec_name(s) + ": " + msg);
    };
    if (!std::isfinite(th)) fail("theta not finite");
    switch (s.family) {
        case Family::joe:
        case Family::gumbel:
            if (th < 1.0) fail("theta must be >= 1");
            break;
        case Family::clayton:
            if (th <= 0.0) fail("theta must be > 0");
            break;
        case Family::frank:
            if (th == 0.0) fail("theta must be nonzero");
            break;
        case Family::gaussian:
        case Family::student_t:
            if (th < -1.0 || th > 1.0) fail("theta must be in [-1,1]");
            break;
    }
    if (s.family == Family::student_t) {
        if (!s.df || !(*s.df > 0.0)) fail("df must be present and positive");
    } else if (s.df) {
        fail("df only valid for the t copula");
    }
}

inline CopulaSpec rotate180(CopulaSpec s) {
    s.rotated180 = !s.rotated180;
    return s;
}

// ---------------------------------------------------------------------------
// base-family kernels (unrotated)
// ---------------------------------------------------------------------------

namespace copula_detail {

const double frank_indep_eps = 1e-8; // |theta| below this is treated as independence

inline double cdf_joe(double u, double v, double th) {
    double a = std::pow(1.0 - u, th), b = std::pow(1.0 - v, th);
    double s = a + b - a * b;
    return 1.0 - std::pow(s, 1.0 / th);
}

inline double logpdf_joe(double u, double v, double th) {
    double lu = std::log1p(-u), lv = std::log1p(-v);
    double a = std::exp(th * lu), b = std::exp(th * lv);
    double s = a + b - a * b;
    return (th - 1.0) * (lu + lv) + (1.0 / th - 2.0) * std::log(s) + std::log(th - 1.0 + s);
}

inline double hfun_joe(double u, double v, double th) {
    double lu = std::log1p(-u), lv = std::log1p(-v);
    double a = std::exp(th * lu), b = std::exp(th * lv);
    double s = a + b - a * b;
    return std::exp((1.0 / th - 1.0) * std::log(s) + (th - 1.0) * lu) * (1.0 - b);
}

inline double cdf_gumbel(double u, double v, double th) {
    double x = -std::log(u), y = -std::log(v);
    double s = std::pow(x, th) + std::pow(y, th);
    return std::exp(-std::pow(s, 1.0 / th));
}

inline double logpdf_gumbel(double u, double v, double th) {
    double x = -std::log(u), y = -std::log(v);
    double s = std::pow(x, th) + std::pow(y, th);
    double w = std::pow(s, 1.0 / th);
    return -w + x + y + (th - 1.0) * (std::log(x) + std::log(y)) +
           (1.0 / th - 2.0) * std::log(s) + std::log(w + th - 1.0);
}

inline double hfun_gumbel(double u, double v, double th) {
    double x = -std::log(u), y = -std::log(v);
    double s = std::pow(x, th) + std::pow(y, th);
    double w = std::pow(s, 1.0 / th);
    return std::exp(-w + x + (th - 1.0) * std::log(x) + (1.0 / th - 1.0) * std::log(s));
}

// log(u^-th + v^-th - 1) without overflow for large th * -log(u)
inline double clayton_logT(double u, double v, double th) {
    double lu = -th * std::log(u), lv = -th * std::log(v);
    double m = std::max(lu, lv);
    return m + std::log(std::exp(lu - m) + std::exp(lv - m) - std::exp(-m));
}

inline double cdf_clayton(double u, double v, double th) {
    return std::exp(-clayton_logT(u, v, th) / th);
}

inline double logpdf_clayton(double u, double v, double th) {
    return std::log1p(th) - (th + 1.0) * (std::log(u) + std::log(v)) -
           (2.0 + 1.0 / th) * clayton_logT(u, v, th);
}

inline double hfun_clayton(double u, double v, double th) {
    return std::exp(-(th + 1.0) * std::log(u) - (1.0 + 1.0 / th) * clayton_logT(u, v, th));
}

inline double cdf_frank(double u, double v, double th) {
    if (std::fabs(th) < frank_indep_eps) return u * v;
    double gu = std::expm1(-th * u), gv = std::expm1(-th * v), g1 = std::expm1(-th);
    return -std::log1p(gu * gv / g1) / th;
}

inline double logpdf_frank(double u, double v, double th) {
    if (std::fabs(th) < frank_indep_eps) return 0.0;
    // D = e^-th*u + e^-th*v - e^-th - e^-th*(u+v), positive for all theta != 0
    double D = std::exp(-th * u) + std::exp(-th * v) - std::exp(-th) - std::exp(-th * (u + v));
    double A = th * -std::expm1(-th); // th * (1 - e^-th) > 0
    return std::log(A) - th * (u + v) - 2.0 * std::log(std::fabs(D));
}

inline double hfun_frank(double u, double v, double th) {
    if (std::fabs(th) < frank_indep_eps) return v;
    double gu = std::expm1(-th * u), gv = std::expm1(-th * v), g1 = std::expm1(-th);
    return std::exp(-th * u) * gv / (g1 + gu * gv);
}

// C(u,v) = int_0^u P(V <= v | U = t) dt; the conditional probability is
// bounded, which keeps the quadrature well behaved for any parameter.
inline double cdf_gaussian(double u, double v, double rho) {
    if (rho >= 1.0) return std::min(u, v);
    if (rho <= -1.0) return std::max(u + v - 1.0, 0.0);
    if (u > v) std::swap(u, v); // symmetric; integrate over the shorter range
    double b = math::norm_quantile(v);
    double sigma = std::sqrt(1.0 - rho * rho);
    double at_zero = rho > 0.0 ? 1.0 : (rho < 0.0 ? 0.0 : v);
    auto f = [&](double t) {
        if (t <= 0.0) return at_zero;
        return math::norm_cdf((b - rho * math::norm_quantile(t)) / sigma);
    };
    return math::integrate(f, 0.0, u, 1e-13, 44);
}

inline double logpdf_gaussian(double u, double v, double rho) {
    if (std::fabs(rho) >= 1.0) throw std::domain_error("gaussian copula density degenerate at |theta| = 1");
    double x = math::norm_quantile(u), y = math::norm_quantile(v);
    double s2 = 1.0 - rho * rho;
    return -0.5 * std::log(s2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * s2);
}

inline double hfun_gaussian(double u, double v, double rho) {
    if (std::fabs(rho) >= 1.0) throw std::domain_error("gaussian copula h-function degenerate at |theta| = 1");
    double x = math::norm_quantile(u), y = math::norm_quantile(v);
    return math::norm_cdf((y - rho * x) / std::sqrt(1.0 - rho * rho));
}

inline double t_cond_arg(double x, double y, double rho, double df) {
    return (y - rho * x) * std::sqrt((df + 1.0) / ((df + x * x) * (1.0 - rho * rho)));
}

inline double cdf_t(double u, double v, double rho, double df) {
    if (rho >= 1.0) return std::min(u, v);
    if (rho <= -1.0) return std::max(u + v - 1.0, 0.0);
    if (u > v) std::swap(u, v);
    double b = math::t_quantile(v, df);
    double at_zero = rho > 0.0 ? 1.0 : (rho < 0.0 ? 0.0 : v);
    auto f = [&](double t) {
        if (t <= 0.0) return at_zero;
        return math::t_cdf(t_cond_arg(math::t_quantile(t, df), b, rho, df), df + 1.0);
    };
    return math::integrate(f, 0.0, u, 1e-13, 44);
}

inline double logpdf_t(double u, double v, double rho, double df) {
    if (std::fabs(rho) >= 1.0) throw std::domain_error("t copula density degenerate at |theta| = 1");
    double x = math::t_quantile(u, df), y = math::t_quantile(v, df);
    double s2 = 1.0 - rho * rho;
    double q = (x * x - 2.0 * rho * x * y + y * y) / s2;
    return std::lgamma(0.5 * (df + 2.0)) + std::lgamma(0.5 * df) - 2.0 * std::lgamma(0.5 * (df + 1.0)) -
           0.5 * std::log(s2) - 0.5 * (df + 2.0) * std::log1p(q / df) +
           0.5 * (df + 1.0) * (std::log1p(x * x / df) + std::log1p(y * y / df));
}

inline double hfun_t(double u, double v, double rho, double df) {
    if (std::fabs(rho) >= 1.0) throw std::domain_error("t copula h-function degenerate at |theta| = 1");
    double x = math::t_quantile(u, df), y = math::t_quantile(v, df);
    return math::t_cdf(t_cond_arg(x, y, rho, df), df + 1.0);
}

inline double base_cdf(const CopulaSpec& s, double u, double v) {
    switch (s.family) {
        case Family::joe: return cdf_joe(u, v, s.theta);
        case Family::gumbel: return cdf_gumbel(u, v, s.theta);
        case Family::clayton: return cdf_clayton(u, v, s.theta);
        case Family::frank: return cdf_frank(u, v, s.theta);
        case Family::gaussian: return cdf_gaussian(u, v, s.theta);
        case Family::student_t: return cdf_t(u, v, s.theta, *s.df);
    }
    return 0.0;
}

inline double base_logpdf(const CopulaSpec& s, double u, double v) {
    switch (s.family) {
        case Family::joe: return logpdf_joe(u, v, s.theta);
        case Family::gumbel: return logpdf_gumbel(u, v, s.theta);
        case Family::clayton: return logpdf_clayton(u, v, s.theta);
        case Family::frank: return logpdf_frank(u, v, s.theta);
        case Family::gaussian: return logpdf_gaussian(u, v, s.theta);
        case Family::student_t: return logpdf_t(u, v, s.theta, *s.df);
    }
    return 0.0;
}

inline double base_hfun(const CopulaSpec& s, double u, double v) {
    switch (s.family) {
        case Family::joe: return hfun_joe(u, v, s.theta);
        case Family::gumbel: return hfun_gumbel(u, v, s.theta);
        case Family::clayton: return hfun_clayton(u, v, s.theta);
        case Family::frank: return hfun_frank(u, v, s.theta);
        case Family::gaussian: return hfun_gaussian(u, v, s.theta);
        case Family::student_t: return hfun_t(u, v, s.theta, *s.df);
    }
    return 0.0;
}

// tau for Joe: 1 + 4/th^2 * int_0^1 t log(t) (1-t)^(2(1-th)/th) dt, with the
// endpoint singularity at t=1 removed by the substitution s = z^th.
inline double joe_tau(double th) {
    if (th == 1.0) return 0.0;
    double a = 2.0 * (1.0 - th) / th;
    auto left = [&](double w) {
        // t = w^2 over t in (0, 1/2]
        if (w <= 0.0) return 0.0;
        double t = w * w;
        return 4.0 * w * t * std::log(w) * std::pow(1.0 - t, a);
    };
    double i_left = math::integrate(left, 0.0, std::sqrt(0.5), 1e-10);
    auto right = [&](double z) {
        // s = 1 - t = z^th over s in (0, 1/2]
        if (z <= 0.0) return 0.0;
        double p = std::pow(z, th);
        double g = p < 1e-8 ? -1.0 - 0.5 * p : std::log1p(-p) / p;
        return th * (1.0 - p) * g * z;
    };
    double i_right = math::integrate(right, 0.0, std::pow(0.5, 1.0 / th), 1e-10);
    return 1.0 + 4.0 / (th * th) * (i_left + i_right);
}

} // namespace copula_detail

// ---------------------------------------------------------------------------
// public operations; 180-degree rotation evaluates u+v-1+C(1-u,1-v) of the
// base family, density c(1-u,1-v), and swaps the two tail coefficients
// ---------------------------------------------------------------------------

inline double cdf(const CopulaSpec& s, double u, double v) {
    validate(s);
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("cdf: (u,v) outside the unit square");
    if (u == 0.0 || v == 0.0) return 0.0;
    if (u == 1.0) return v;
    if (v == 1.0) return u;
    double c = s.rotated180 ? u + v - 1.0 + copula_detail::base_cdf(s, 1.0 - u, 1.0 - v)
                            : copula_detail::base_cdf(s, u, v);
    return std::min(1.0, std::max(0.0, c));
}

inline double log_density(const CopulaSpec& s, double u, double v) {
    validate(s);
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
        throw std::domain_error("log_density: (u,v) must be interior to the unit square");
    return s.rotated180 ? copula_detail::base_logpdf(s, 1.0 - u, 1.0 - v)
                        : copula_detail::base_logpdf(s, u, v);
}

// Conditional CDF P(V <= v | U = u); the sampling inverse of this gives the
// conditional-distribution sampler.
inline double conditional_cdf(const CopulaSpec& s, double u, double v) {
    validate(s);
    if (!(u > 0.0 && u < 1.0 && v >= 0.0 && v <= 1.0))
        throw std::domain_error("conditional_cdf: u interior, v in [0,1] required");
    if (v == 0.0) return 0.0;
    if (v == 1.0) return 1.0;
    return s.rotated180 ? 1.0 - copula_detail::base_hfun(s, 1.0 - u, 1.0 - v)
                        : copula_detail::base_hfun(s, u, v);
}

inline TdcPair tdc(const CopulaSpec& s) {
    validate(s);
    TdcPair base;
    switch (s.family) {
        case Family::joe:
        case Family::gumbel:
            base = {0.0, 2.0 - std::pow(2.0, 1.0 / s.theta)};
            break;
        case Family::clayton:
            base = {std::pow(2.0, -1.0 / s.theta), 0.0};
            break;
        case Family::frank:
        case Family::gaussian:
            base = {0.0, 0.0};
            break;
        case Family::student_t: {
            double v = *s.df, rho = s.theta;
            double lam = (rho <= -1.0)
                             ? 0.0
                             : 2.0 * math::t_cdf(-std::sqrt((v + 1.0) * (1.0 - rho) / (1.0 + rho)), v + 1.0);
            base = {lam, lam};
            break;
        }
    }
    return s.rotated180 ? TdcPair{base.upper, base.lower} : base;
}

// Rotation by 180 degrees preserves concordance, so tau is that of the base
// family.
inline double kendall_tau(const CopulaSpec& s) {
    validate(s);
    switch (s.family) {
        case Family::joe: return copula_detail::joe_tau(s.theta);
        case Family::gumbel: return 1.0 - 1.0 / s.theta;
        case Family::clayton: return s.theta / (s.theta + 2.0);
        case Family::frank: {
            double th = s.theta;
            if (std::fabs(th) < copula_detail::frank_indep_eps) return th / 9.0;
            return 1.0 - 4.0 / th + 4.0 * math::debye1(th) / th;
        }
        case Family::gaussian:
        case Family::student_t:
            return 2.0 / math::pi * std::asin(s.theta);
    }
    return 0.0;
}

} // namespace tailblend
