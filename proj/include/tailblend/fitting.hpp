#pragma once

// Parameter estimation: weighted gamma GLM marginals (log link), maximum
// pseudo-likelihood copula fits with a profiled-df Student t, the IFM
// two-stage full-parametric fit, and information criteria.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "tailblend/copula.hpp"
#include "tailblend/empirical.hpp"
#include "tailblend/errors.hpp"
#include "tailblend/math/brent.hpp"

namespace tailblend {

// ---------------------------------------------------------------------------
// gamma GLM
// ---------------------------------------------------------------------------

struct GammaGlmFit {
    std::vector<double> coefficients; // log link: mu_i = exp(x_i . beta)
    double shape = 1.0;
    double loglik = 0.0;
    bool converged = true;

    double mean_at(const Eigen::VectorXd& x) const {
        double eta = 0.0;
        for (int j = 0; j < x.size(); ++j) eta += coefficients[j] * x[j];
        return std::exp(eta);
    }
};

namespace fitting_detail {

inline double gamma_glm_loglik(const std::vector<double>& y, const Eigen::MatrixXd& X,
                               const std::vector<double>& w, const Eigen::VectorXd& beta,
                               double shape) {
    double ll = 0.0;
    Eigen::VectorXd eta = X * beta;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (w[i] == 0.0) continue;
        double mu = std::exp(eta[i]);
        ll += w[i] * (shape * (std::log(shape) - std::log(mu)) + (shape - 1.0) * std::log(y[i]) -
                      shape * y[i] / mu - std::lgamma(shape));
    }
    return ll;
}

} // namespace fitting_detail

// Joint maximum likelihood over (beta, shape). Per-observation weights feed
// the EM M-step; zero-weight rows are ignored entirely.
inline GammaGlmFit fit_gamma_glm(const std::vector<double>& y, const Eigen::MatrixXd& X,
                                 std::vector<double> w = {}) {
    const std::size_t n = y.size();
    if (static_cast<std::size_t>(X.rows()) != n)
        throw DataError("fit_gamma_glm: design rows do not match response length");
    if (w.empty()) w.assign(n, 1.0);
    if (w.size() != n) throw DataError("fit_gamma_glm: weight length mismatch");
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i] < 0.0) throw DataError("fit_gamma_glm: negative weight");
        if (w[i] > 0.0 && !(y[i] > 0.0)) throw DataError("fit_gamma_glm: responses must be positive");
        wsum += w[i];
    }
    const int p = static_cast<int>(X.cols());
    if (wsum <= 0.0 || static_cast<double>(wsum) < p)
        throw FitError("fit_gamma_glm: not enough effective observations");

    Eigen::MatrixXd Xw = X;
    for (std::size_t i = 0; i < n; ++i) Xw.row(i) *= std::sqrt(w[i]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) throw DataError("fit_gamma_glm: design matrix is rank deficient");

    // Fisher scoring for beta; the shape cancels from the score equations
    double mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_y += w[i] * y[i];
    mean_y /= wsum;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    beta[0] = std::log(mean_y);
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd eta = X * beta;
        Eigen::VectorXd r(n);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = w[i] > 0.0 ? w[i] * (y[i] * std::exp(-eta[i]) - 1.0) : 0.0;
        Eigen::MatrixXd XtWX = Eigen::MatrixXd::Zero(p, p);
        for (std::size_t i = 0; i < n; ++i)
            if (w[i] > 0.0) XtWX.noalias() += w[i] * X.row(i).transpose() * X.row(i);
        Eigen::VectorXd step = XtWX.ldlt().solve(X.transpose() * r);
        beta += step;
        if (step.cwiseAbs().maxCoeff() < 1e-11) {
            converged = true;
            break;
        }
    }

    // profile shape MLE: log(g) - digamma(g) = s
    Eigen::VectorXd eta = X * beta;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i] == 0.0) continue;
        double lm = eta[i];
        s += w[i] * (std::log(y[i]) - lm - y[i] * std::exp(-lm));
    }
    s = -(1.0 + s / wsum); // target of log(g) - digamma(g), always > 0
    double g = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    if (!(g > 0.0) || !std::isfinite(g)) g = 1.0;
    for (int it = 0; it < 100; ++it) {
        double f = std::log(g) - math::digamma(g) - s;
        double fp = 1.0 / g - math::trigamma(g);
        double gn = g - f / fp;
        if (!(gn > 0.0)) gn = 0.5 * g;
        if (std::fabs(gn - g) < 1e-12 * g) {
            g = gn;
            break;
        }
        g = gn;
    }

    GammaGlmFit fit;
    fit.coefficients.assign(beta.data(), beta.data() + p);
    fit.shape = g;
    fit.converged = converged;
    fit.loglik = fitting_detail::gamma_glm_loglik(y, X, w, beta, g);
    return fit;
}

// ---------------------------------------------------------------------------
// copula likelihood maximization
// ---------------------------------------------------------------------------

struct FitRecord {
    CopulaSpec spec;
    double loglik = 0.0;
    int n_params = 0;
    std::size_t n_obs = 0;
    double aic = 0.0;
    double bic = 0.0;
    TdcPair tdc_pair;
    bool converged = true;
    bool at_boundary = false;
    std::size_t clamped = 0; // IFM stage-2 CDF values pushed off 0/1
};

inline FitRecord make_fit_record(const CopulaSpec& spec, double loglik, int n_params,
                                 std::size_t n_obs) {
    FitRecord r;
    r.spec = spec;
    r.loglik = loglik;
    r.n_params = n_params;
    r.n_obs = n_obs;
    r.aic = -2.0 * loglik + 2.0 * n_params;
    r.bic = -2.0 * loglik + n_params * std::log(static_cast<double>(n_obs));
    r.tdc_pair = tdc(spec);
    return r;
}

namespace fitting_detail {

constexpr double uv_clamp = 1e-12; // likelihood inputs stay this far inside (0,1)

struct ThetaTransform {
    double lo, hi;                       // search box on the transformed scale
    double (*to_theta)(double);
    double boundary_margin = 1e-3;
};

inline ThetaTransform theta_transform(Family f) {
    switch (f) {
        case Family::joe:
        case Family::gumbel:
            // theta = 1 + exp(t)
            return {std::log(1e-6), std::log(49.0), [](double t) { return 1.0 + std::exp(t); }};
        case Family::clayton:
            // theta = exp(t), lower fitting bound 1e-4
            return {std::log(1e-4), std::log(28.0), [](double t) { return std::exp(t); }};
        case Family::frank:
            return {-45.0, 45.0, [](double t) { return t; }};
        case Family::gaussian:
        case Family::student_t:
            // theta = tanh(t)
            return {-8.0, 8.0, [](double t) { return std::tanh(t); }};
    }
    return {0.0, 1.0, [](double t) { return t; }};
}

struct WeightedUV {
    const std::vector<double>& u;
    const std::vector<double>& v;
    const std::vector<double>* w; // null = unweighted
};

template <class LogDensity>
double weighted_negloglik(const WeightedUV& data, const LogDensity& logc) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.u.size(); ++i) {
        double wi = data.w ? (*data.w)[i] : 1.0;
        if (wi == 0.0) continue;
        s += wi * logc(data.u[i], data.v[i]);
    }
    return -s;
}

struct ScalarFit {
    double theta = 0.0;
    double loglik = 0.0;
    bool at_boundary = false;
    bool converged = true;
};

// One-parameter families (and the elliptical rho for fixed df): coarse scan
// plus Brent on the transformed scale, tolerance 1e-7.
inline ScalarFit fit_scalar_theta(Family fam, const WeightedUV& data,
                                  std::optional<double> df = {}) {
    ThetaTransform tr = theta_transform(fam);
    auto objective = [&](double t) {
        CopulaSpec s{fam, tr.to_theta(t), df, false};
        if (fam == Family::frank && std::fabs(s.theta) < 1e-7) return 0.0; // independence limit
        return weighted_negloglik(data, [&](double u, double v) {
            return copula_detail::base_logpdf(s, u, v);
        });
    };
    auto r = math::grid_then_brent(objective, tr.lo, tr.hi, 32, 1e-7);
    ScalarFit f;
    f.theta = tr.to_theta(r.x);
    f.loglik = -r.fx;
    f.at_boundary = (r.x - tr.lo < tr.boundary_margin) || (tr.hi - r.x < tr.boundary_margin);
    f.converged = std::isfinite(r.fx);
    return f;
}

struct TFit {
    double rho = 0.0;
    double df = 10.0;
    double loglik = 0.0;
    bool at_boundary = false;
    bool converged = true;
};

// Student t: profile the df over a fixed grid with an inner rho
// optimization, then refine df locally. Marginal t quantiles are cached per
// df, which is what makes the profile affordable.
inline TFit fit_student_t(const WeightedUV& data) {
    std::vector<double> df_grid;
    for (double v = 2.0; v <= 30.0; v += 0.5) df_grid.push_back(v);
    df_grid.insert(df_grid.end(), {40.0, 60.0, 120.0});

    const std::size_t n = data.u.size();
    std::vector<double> x(n), y(n), lx(n), ly(n);
    auto profile = [&](double df, double& rho_out, bool& boundary_out) {
        double c0 = std::lgamma(0.5 * (df + 2.0)) + std::lgamma(0.5 * df) -
                    2.0 * std::lgamma(0.5 * (df + 1.0));
        double wsum = 0.0, base = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double wi = data.w ? (*data.w)[i] : 1.0;
            if (wi == 0.0) continue;
            x[i] = math::t_quantile(data.u[i], df);
            y[i] = math::t_quantile(data.v[i], df);
            lx[i] = std::log1p(x[i] * x[i] / df);
            ly[i] = std::log1p(y[i] * y[i] / df);
            wsum += wi;
            base += wi * (lx[i] + ly[i]);
        }
        auto neg = [&](double t) {
            double rho = std::tanh(t);
            double s2 = 1.0 - rho * rho;
            double ll = wsum * (c0 - 0.5 * std::log(s2)) + 0.5 * (df + 1.0) * base;
            for (std::size_t i = 0; i < n; ++i) {
                double wi = data.w ? (*data.w)[i] : 1.0;
                if (wi == 0.0) continue;
                double q = (x[i] * x[i] - 2.0 * rho * x[i] * y[i] + y[i] * y[i]) / s2;
                ll -= wi * 0.5 * (df + 2.0) * std::log1p(q / df);
            }
            return -ll;
        };
        auto r = math::grid_then_brent(neg, -8.0, 8.0, 16, 1e-7);
        rho_out = std::tanh(r.x);
        boundary_out = (r.x + 8.0 < 1e-3) || (8.0 - r.x < 1e-3);
        return -r.fx;
    };

    TFit best;
    best.loglik = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < df_grid.size(); ++i) {
        double rho;
        bool bnd;
        double ll = profile(df_grid[i], rho, bnd);
        if (ll > best.loglik) {
            best = {rho, df_grid[i], ll, bnd, true};
            best_idx = i;
        }
    }
    // local refinement between the neighbouring grid points, on log(df)
    double lo = std::log(df_grid[best_idx > 0 ? best_idx - 1 : 0]);
    double hi = std::log(df_grid[std::min(best_idx + 1, df_grid.size() - 1)]);
    if (hi > lo) {
        auto neg_df = [&](double t) {
            double rho;
            bool bnd;
            return -profile(std::exp(t), rho, bnd);
        };
        auto r = math::brent_minimize(neg_df, lo, hi, 5e-3, 40);
        if (-r.fx > best.loglik) {
            double rho;
            bool bnd;
            double ll = profile(std::exp(r.x), rho, bnd);
            best = {rho, std::exp(r.x), ll, bnd, true};
        }
    }
    return best;
}

// Rotation reduces to the base family on (1-u, 1-v).
inline WeightedUV maybe_rotate(const std::vector<double>& u, const std::vector<double>& v,
                               const std::vector<double>* w, bool rotated,
                               std::vector<double>& bu, std::vector<double>& bv) {
    if (!rotated) return {u, v, w};
    bu.resize(u.size());
    bv.resize(v.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        bu[i] = 1.0 - u[i];
        bv[i] = 1.0 - v[i];
    }
    return {bu, bv, w};
}

struct CopulaMle {
    CopulaSpec spec;
    double loglik = 0.0;
    bool at_boundary = false;
    bool converged = true;
};

inline CopulaMle maximize_copula_loglik(Family fam, bool rotated, const std::vector<double>& u,
                                        const std::vector<double>& v,
                                        const std::vector<double>* w = nullptr) {
    std::vector<double> bu, bv;
    WeightedUV data = maybe_rotate(u, v, w, rotated, bu, bv);
    CopulaMle out;
    if (fam == Family::student_t) {
        TFit t = fit_student_t(data);
        out.spec = {Family::student_t, t.rho, t.df, rotated};
        out.loglik = t.loglik;
        out.at_boundary = t.at_boundary;
        out.converged = t.converged;
    } else {
        ScalarFit f = fit_scalar_theta(fam, data);
        out.spec = {fam, f.theta, {}, rotated};
        out.loglik = f.loglik;
        out.at_boundary = f.at_boundary;
        out.converged = f.converged;
    }
    if (!std::isfinite(out.loglik)) {
        out.converged = false;
        throw FitError(std::string("copula fit failed for ") + spec_name(out.spec));
    }
    return out;
}

} // namespace fitting_detail

// Maximum pseudo-likelihood over the /(N+1) pseudo-observations.
inline FitRecord fit_copula_mple(Family fam, bool rotated, const PseudoSample& ps) {
    if (ps.n < 16) throw DataError("fit_copula_mple: need at least 16 observations");
    auto m = fitting_detail::maximize_copula_loglik(fam, rotated, ps.u, ps.v);
    FitRecord r = make_fit_record(m.spec, m.loglik, copula_param_count(fam), ps.n);
    r.converged = m.converged;
    r.at_boundary = m.at_boundary;
    return r;
}

struct IfmFit {
    FitRecord record;       // total log-likelihood f1 f2 c and full parameter count
    GammaGlmFit margin1, margin2;
    double copula_loglik = 0.0;
};

// Inference functions for margins: gamma-GLM marginals first, then the
// copula at the fitted marginal CDF values.
inline IfmFit fit_copula_ifm(Family fam, bool rotated, const std::vector<double>& y1,
                             const std::vector<double>& y2, const Eigen::MatrixXd& X1,
                             const Eigen::MatrixXd& X2) {
    if (y1.size() != y2.size()) throw DataError("fit_copula_ifm: response length mismatch");
    IfmFit fit;
    fit.margin1 = fit_gamma_glm(y1, X1);
    fit.margin2 = fit_gamma_glm(y2, X2);

    const std::size_t n = y1.size();
    std::vector<double> u(n), v(n);
    std::size_t clamped = 0;
    Eigen::VectorXd eta1 = X1 * Eigen::Map<const Eigen::VectorXd>(fit.margin1.coefficients.data(),
                                                                  X1.cols());
    Eigen::VectorXd eta2 = X2 * Eigen::Map<const Eigen::VectorXd>(fit.margin2.coefficients.data(),
                                                                  X2.cols());
    auto pit = [&](double y, double eta, double shape, std::size_t& nclamp) {
        double mu = std::exp(eta);
        double p = math::gamma_cdf(y, shape, shape / mu);
        if (p < fitting_detail::uv_clamp) {
            ++nclamp;
            return fitting_detail::uv_clamp;
        }
        if (p > 1.0 - fitting_detail::uv_clamp) {
            ++nclamp;
            return 1.0 - fitting_detail::uv_clamp;
        }
        return p;
    };
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = pit(y1[i], eta1[i], fit.margin1.shape, clamped);
        v[i] = pit(y2[i], eta2[i], fit.margin2.shape, clamped);
    }

    auto m = fitting_detail::maximize_copula_loglik(fam, rotated, u, v);
    fit.copula_loglik = m.loglik;
    int n_params = copula_param_count(fam) + static_cast<int>(X1.cols()) + 1 +
                   static_cast<int>(X2.cols()) + 1;
    double total = m.loglik + fit.margin1.loglik + fit.margin2.loglik;
    fit.record = make_fit_record(m.spec, total, n_params, n);
    fit.record.converged = m.converged;
    fit.record.at_boundary = m.at_boundary;
    fit.record.clamped = clamped;
    return fit;
}

// The nine-copula pool used throughout: Joe, Gumbel and Clayton in plain and
// survival form, plus Frank, Gaussian and Student t.
inline std::vector<std::pair<Family, bool>> default_pool() {
    return {{Family::joe, false},     {Family::joe, true},     {Family::gumbel, false},
            {Family::gumbel, true},   {Family::clayton, false}, {Family::clayton, true},
            {Family::frank, false},   {Family::gaussian, false}, {Family::student_t, false}};
}

// Fit every pool member by MPLE; failures are returned as non-converged
// records with -inf log-likelihood rather than aborting the sweep.
inline std::vector<FitRecord> fit_pool_mple(const PseudoSample& ps,
                                            const std::vector<std::pair<Family, bool>>& pool =
                                                default_pool()) {
    std::vector<FitRecord> out;
    out.reserve(pool.size());
    for (auto [fam, rot] : pool) {
        try {
            out.push_back(fit_copula_mple(fam, rot, ps));
        } catch (const std::exception&) {
            FitRecord bad;
            bad.spec = {fam, fam == Family::gaussian || fam == Family::student_t ? 0.0 : 1.0,
                        fam == Family::student_t ? std::optional<double>(10.0) : std::nullopt, rot};
            bad.loglik = -std::numeric_limits<double>::infinity();
            bad.bic = std::numeric_limits<double>::infinity();
            bad.aic = std::numeric_limits<double>::infinity();
            bad.n_obs = ps.n;
            bad.n_params = copula_param_count(fam);
            bad.converged = false;
            out.push_back(bad);
        }
    }
    return out;
}

} // namespace tailblend
