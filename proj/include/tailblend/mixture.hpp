#pragma once

// Finite mixtures of copula regressions fitted by EM: gamma-GLM marginals
// and a copula per component, mixing proportions, responsibilities,
// permutation search over component copulas, and mixture tail coefficients.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "tailblend/copula.hpp"
#include "tailblend/fitting.hpp"
#include "tailblend/rng.hpp"

namespace tailblend {

struct MixtureComponent {
    CopulaSpec copula;
    GammaGlmFit margin1, margin2;
};

struct MixtureModel {
    std::size_t g = 0;
    std::vector<MixtureComponent> components;
    std::vector<double> mixing;                        // tau_g
    std::vector<std::vector<double>> responsibilities; // n rows, g columns
    double loglik = 0.0;
    int n_params = 0;
    std::size_t n_obs = 0;
    double aic = 0.0, bic = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> loglik_trace; // observed log-likelihood per iteration
    bool failed = false;
    std::string failure;
};

struct EmConfig {
    double epsilon = 1e-5; // relative log-likelihood stop
    int max_iter = 500;
    enum class Init { hierarchical, random, given_labels } init = Init::hierarchical;
    int restarts = 1;
    std::uint64_t seed = 0;
    std::vector<int> labels; // used by Init::given_labels, values 0..G-1
};

namespace mixture_detail {

constexpr double min_effective_obs = 5.0;
constexpr double log_floor = -700.0;

// per-component cache of marginal transforms and log densities
struct ComponentWork {
    std::vector<double> u, v;        // clamped marginal CDF values
    std::vector<double> log_margins; // log f1 + log f2
};

inline void marginal_transform(const MixtureComponent& comp, const std::vector<double>& y1,
                               const std::vector<double>& y2, const Eigen::MatrixXd& X1,
                               const Eigen::MatrixXd& X2, ComponentWork& work) {
    const std::size_t n = y1.size();
    work.u.resize(n);
    work.v.resize(n);
    work.log_margins.resize(n);
    Eigen::VectorXd eta1 =
        X1 * Eigen::Map<const Eigen::VectorXd>(comp.margin1.coefficients.data(), X1.cols());
    Eigen::VectorXd eta2 =
        X2 * Eigen::Map<const Eigen::VectorXd>(comp.margin2.coefficients.data(), X2.cols());
    double g1 = comp.margin1.shape, g2 = comp.margin2.shape;
    for (std::size_t i = 0; i < n; ++i) {
        double mu1 = std::exp(eta1[i]), mu2 = std::exp(eta2[i]);
        double r1 = g1 / mu1, r2 = g2 / mu2;
        double p1 = math::gamma_cdf(y1[i], g1, r1);
        double p2 = math::gamma_cdf(y2[i], g2, r2);
        work.u[i] = std::min(1.0 - fitting_detail::uv_clamp,
                             std::max(fitting_detail::uv_clamp, p1));
        work.v[i] = std::min(1.0 - fitting_detail::uv_clamp,
                             std::max(fitting_detail::uv_clamp, p2));
        work.log_margins[i] =
            math::gamma_logpdf(y1[i], g1, r1) + math::gamma_logpdf(y2[i], g2, r2);
    }
}

// log h_g(y_i) = log c_g(u,v) + log f1 + log f2, floored to keep rows usable
inline void component_log_density(const MixtureComponent& comp, const ComponentWork& work,
                                  std::vector<double>& out) {
    const std::size_t n = work.u.size();
    out.resize(n);
    CopulaSpec base = comp.copula;
    bool rot = base.rotated180;
    base.rotated180 = false;
    for (std::size_t i = 0; i < n; ++i) {
        double u = rot ? 1.0 - work.u[i] : work.u[i];
        double v = rot ? 1.0 - work.v[i] : work.v[i];
        double lc = copula_detail::base_logpdf(base, u, v);
        double lh = lc + work.log_margins[i];
        out[i] = std::max(lh, log_floor);
    }
}

inline int mixture_param_count(const std::vector<std::pair<Family, bool>>& families, int p1,
                               int p2) {
    int total = static_cast<int>(families.size()) - 1; // mixing proportions
    for (auto [fam, rot] : families) {
        (void)rot;
        total += copula_param_count(fam) + (p1 + 1) + (p2 + 1);
    }
    return total;
}

// Ward-linkage agglomerative clustering (nearest-neighbour chain) on the
// standardized log responses; returns hard labels 0..g-1.
inline std::vector<int> ward_labels(const std::vector<double>& y1, const std::vector<double>& y2,
                                    std::size_t g, std::uint64_t seed) {
    const std::size_t n = y1.size();
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::log(y1[i]);
        b[i] = std::log(y2[i]);
    }
    auto standardize = [](std::vector<double>& x) {
        double m = 0.0, s = 0.0;
        for (double t : x) m += t;
        m /= x.size();
        for (double t : x) s += (t - m) * (t - m);
        s = std::sqrt(s / x.size());
        if (s == 0.0) s = 1.0;
        for (double& t : x) t = (t - m) / s;
    };
    standardize(a);
    standardize(b);

    // subsample large inputs; remaining points join the nearest centroid
    std::vector<std::size_t> take(n);
    std::iota(take.begin(), take.end(), 0);
    const std::size_t cap = 4000;
    if (n > cap) {
        Rng rng(derive_seed(seed, 0xAACC));
        for (std::size_t i = n - 1; i > 0; --i) std::swap(take[i], take[rng.below(i + 1)]);
        take.resize(cap);
        std::sort(take.begin(), take.end());
    }
    const std::size_t m = take.size();

    struct Cluster {
        double cx, cy;
        double size;
        bool active;
    };
    std::vector<Cluster> cl(m);
    std::vector<int> member(m); // cluster id per subsampled point (union path)
    std::vector<int> parent(2 * m, -1);
    for (std::size_t i = 0; i < m; ++i) {
        cl[i] = {a[take[i]], b[take[i]], 1.0, true};
        member[i] = static_cast<int>(i);
    }
    auto ward = [&](const Cluster& p, const Cluster& q) {
        double dx = p.cx - q.cx, dy = p.cy - q.cy;
        return p.size * q.size / (p.size + q.size) * (dx * dx + dy * dy);
    };
    std::size_t active = m;
    std::vector<int> chain;
    chain.reserve(m);
    while (active > g) {
        if (chain.empty()) {
            for (std::size_t i = 0; i < cl.size(); ++i)
                if (cl[i].active) {
                    chain.push_back(static_cast<int>(i));
                    break;
                }
        }
        int top = chain.back();
        int nn = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cl.size(); ++j) {
            if (!cl[j].active || static_cast<int>(j) == top) continue;
            double d = ward(cl[top], cl[j]);
            if (d < best) {
                best = d;
                nn = static_cast<int>(j);
            }
        }
        if (chain.size() >= 2 && nn == chain[chain.size() - 2]) {
            // reciprocal nearest neighbours: merge
            chain.pop_back();
            chain.pop_back();
            Cluster merged;
            merged.size = cl[top].size + cl[nn].size;
            merged.cx = (cl[top].cx * cl[top].size + cl[nn].cx * cl[nn].size) / merged.size;
            merged.cy = (cl[top].cy * cl[top].size + cl[nn].cy * cl[nn].size) / merged.size;
            merged.active = true;
            cl[top].active = false;
            cl[nn].active = false;
            parent[top] = parent[nn] = static_cast<int>(cl.size());
            cl.push_back(merged);
            parent.push_back(-1);
            --active;
        } else {
            chain.push_back(nn);
        }
    }

    std::vector<int> root_label(cl.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < cl.size(); ++i)
        if (cl[i].active) root_label[i] = next++;
    auto find_root = [&](int i) {
        while (parent[i] >= 0) i = parent[i];
        return i;
    };
    std::vector<int> labels(n, -1);
    for (std::size_t i = 0; i < m; ++i) labels[take[i]] = root_label[find_root(member[i])];
    if (m < n) {
        // assign leftover points to the nearest final centroid
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] >= 0) continue;
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (std::size_t j = 0; j < cl.size(); ++j) {
                if (!cl[j].active) continue;
                double dx = a[i] - cl[j].cx, dy = b[i] - cl[j].cy;
                double d = dx * dx + dy * dy;
                if (d < best) {
                    best = d;
                    arg = root_label[j];
                }
            }
            labels[i] = arg;
        }
    }
    return labels;
}

} // namespace mixture_detail

// Posterior component-membership probabilities at the model's parameters;
// rows are normalized with log-sum-exp and never error on underflow.
inline std::vector<std::vector<double>> e_step(const MixtureModel& model,
                                               const std::vector<double>& y1,
                                               const std::vector<double>& y2,
                                               const Eigen::MatrixXd& X1,
                                               const Eigen::MatrixXd& X2,
                                               double* loglik_out = nullptr) {
    const std::size_t n = y1.size(), g = model.g;
    std::vector<std::vector<double>> logh(g);
    mixture_detail::ComponentWork work;
    for (std::size_t k = 0; k < g; ++k) {
        mixture_detail::marginal_transform(model.components[k], y1, y2, X1, X2, work);
        mixture_detail::component_log_density(model.components[k], work, logh[k]);
    }
    std::vector<std::vector<double>> resp(n, std::vector<double>(g));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < g; ++k) {
            resp[i][k] = std::log(model.mixing[k]) + logh[k][i];
            mx = std::max(mx, resp[i][k]);
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < g; ++k) sum += std::exp(resp[i][k] - mx);
        double lse = mx + std::log(sum);
        total += lse;
        for (std::size_t k = 0; k < g; ++k) resp[i][k] = std::exp(resp[i][k] - lse);
    }
    if (loglik_out) *loglik_out = total;
    return resp;
}

// M-step: mixing proportions by column means, weighted gamma-GLM refits of
// both margins, then the copula parameter on the weighted copula
// log-likelihood at the updated marginal CDF values. Components whose
// effective weight falls below 5 observations abort the fit.
inline MixtureModel m_step(const std::vector<std::vector<double>>& resp,
                           const std::vector<double>& y1, const std::vector<double>& y2,
                           const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2,
                           const std::vector<std::pair<Family, bool>>& families) {
    const std::size_t n = resp.size(), g = families.size();
    MixtureModel model;
    model.g = g;
    model.n_obs = n;
    model.components.resize(g);
    model.mixing.assign(g, 0.0);
    std::vector<double> w(n);
    for (std::size_t k = 0; k < g; ++k) {
        double eff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = resp[i][k];
            eff += w[i];
        }
        model.mixing[k] = eff / static_cast<double>(n);
        if (eff < mixture_detail::min_effective_obs)
            throw FitError("m_step: component " + std::to_string(k + 1) +
                           " degenerated (effective weight " + std::to_string(eff) + ")");
        MixtureComponent& comp = model.components[k];
        comp.margin1 = fit_gamma_glm(y1, X1, w);
        comp.margin2 = fit_gamma_glm(y2, X2, w);
        comp.copula.family = families[k].first;
        comp.copula.rotated180 = families[k].second;
        mixture_detail::ComponentWork work;
        mixture_detail::marginal_transform(comp, y1, y2, X1, X2, work);
        auto mle = fitting_detail::maximize_copula_loglik(families[k].first, families[k].second,
                                                          work.u, work.v, &w);
        comp.copula = mle.spec;
    }
    model.n_params = mixture_detail::mixture_param_count(families, static_cast<int>(X1.cols()) - 1,
                                                         static_cast<int>(X2.cols()) - 1);
    return model;
}

namespace mixture_detail {

inline std::vector<std::vector<double>> hard_responsibilities(const std::vector<int>& labels,
                                                              std::size_t g) {
    std::vector<std::vector<double>> resp(labels.size(), std::vector<double>(g, 0.0));
    for (std::size_t i = 0; i < labels.size(); ++i) resp[i][labels[i]] = 1.0;
    return resp;
}

// tau + copula-only update with margins frozen; a conditional-maximization
// step that cannot decrease the observed log-likelihood
inline MixtureModel partial_m_step(const std::vector<std::vector<double>>& resp,
                                   const MixtureModel& prev, const std::vector<double>& y1,
                                   const std::vector<double>& y2, const Eigen::MatrixXd& X1,
                                   const Eigen::MatrixXd& X2,
                                   const std::vector<std::pair<Family, bool>>& families) {
    const std::size_t n = resp.size(), g = families.size();
    MixtureModel model = prev;
    std::vector<double> w(n);
    for (std::size_t k = 0; k < g; ++k) {
        double eff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = resp[i][k];
            eff += w[i];
        }
        model.mixing[k] = eff / static_cast<double>(n);
        if (eff < min_effective_obs)
            throw FitError("m_step: component " + std::to_string(k + 1) + " degenerated");
        ComponentWork work;
        marginal_transform(model.components[k], y1, y2, X1, X2, work);
        auto mle = fitting_detail::maximize_copula_loglik(families[k].first, families[k].second,
                                                          work.u, work.v, &w);
        // keep the previous copula parameter when the optimizer cannot match it
        double prev_ll = 0.0, new_ll = 0.0;
        CopulaSpec prev_base = prev.components[k].copula;
        prev_base.rotated180 = false;
        CopulaSpec new_base = mle.spec;
        new_base.rotated180 = false;
        bool rot = families[k].second;
        for (std::size_t i = 0; i < n; ++i) {
            if (w[i] == 0.0) continue;
            double u = rot ? 1.0 - work.u[i] : work.u[i];
            double v = rot ? 1.0 - work.v[i] : work.v[i];
            prev_ll += w[i] * copula_detail::base_logpdf(prev_base, u, v);
            new_ll += w[i] * copula_detail::base_logpdf(new_base, u, v);
        }
        model.components[k].copula = (new_ll >= prev_ll) ? mle.spec : prev.components[k].copula;
    }
    return model;
}

} // namespace mixture_detail

// Full EM run. The observed log-likelihood is non-decreasing across
// iterations: if the margins-then-copula M-step ever overshoots, the
// iteration falls back to the tau+copula conditional update.
inline MixtureModel em_fit(const std::vector<double>& y1, const std::vector<double>& y2,
                           const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2,
                           const std::vector<std::pair<Family, bool>>& families,
                           const EmConfig& cfg = {}) {
    const std::size_t n = y1.size(), g = families.size();
    if (g < 1) throw std::invalid_argument("em_fit: need at least one component");
    if (n < 20 * g) throw DataError("em_fit: need at least 20 observations per component");

    auto run_once = [&](const std::vector<int>& labels) {
        auto resp = mixture_detail::hard_responsibilities(labels, g);
        MixtureModel model = m_step(resp, y1, y2, X1, X2, families);
        double ll = 0.0;
        resp = e_step(model, y1, y2, X1, X2, &ll);
        std::vector<double> trace{ll};
        int iterations = 0;
        bool converged = false;
        for (int it = 1; it <= cfg.max_iter; ++it) {
            MixtureModel next = m_step(resp, y1, y2, X1, X2, families);
            double ll_next = 0.0;
            auto resp_next = e_step(next, y1, y2, X1, X2, &ll_next);
            if (ll_next < ll - 1e-9 * (1.0 + std::fabs(ll))) {
                next = mixture_detail::partial_m_step(resp, model, y1, y2, X1, X2, families);
                resp_next = e_step(next, y1, y2, X1, X2, &ll_next);
            }
            double rel = (ll_next - ll) / std::max(1.0, std::fabs(ll_next));
            model = std::move(next);
            iterations = it;
            resp = std::move(resp_next);
            ll = ll_next;
            trace.push_back(ll);
            if (rel >= 0.0 && rel < cfg.epsilon) {
                converged = true;
                break;
            }
        }
        model.iterations = iterations;
        model.converged = converged;
        model.loglik_trace = std::move(trace);
        model.loglik = ll;
        model.responsibilities = std::move(resp);
        model.n_obs = n;
        model.aic = -2.0 * ll + 2.0 * model.n_params;
        model.bic = -2.0 * ll + model.n_params * std::log(static_cast<double>(n));
        return model;
    };

    auto initial_labels = [&](int restart) -> std::vector<int> {
        if (restart == 0) {
            switch (cfg.init) {
                case EmConfig::Init::given_labels:
                    if (cfg.labels.size() != n)
                        throw std::invalid_argument("em_fit: given labels have wrong length");
                    return cfg.labels;
                case EmConfig::Init::random:
                    break;
                case EmConfig::Init::hierarchical:
                    if (g == 1) return std::vector<int>(n, 0);
                    return mixture_detail::ward_labels(y1, y2, g, cfg.seed);
            }
        }
        Rng rng(derive_seed(cfg.seed, 0xE0 + restart));
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(rng.below(g));
        return labels;
    };

    MixtureModel best;
    best.failed = true;
    best.loglik = -std::numeric_limits<double>::infinity();
    std::string last_error = "em_fit: no run attempted";
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        try {
            MixtureModel m = run_once(initial_labels(r));
            if (m.loglik > best.loglik || best.failed) {
                best = std::move(m);
                best.failed = false;
            }
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    if (best.failed) throw FitError(last_error);
    return best;
}

// tau-weighted sum of the component analytic tail coefficients
inline TdcPair mixture_tdc(const MixtureModel& model) {
    TdcPair out{0.0, 0.0};
    for (std::size_t k = 0; k < model.g; ++k) {
        TdcPair t = tdc(model.components[k].copula);
        out.lower += model.mixing[k] * t.lower;
        out.upper += model.mixing[k] * t.upper;
    }
    return out;
}

// MAP labels (0-based), ties broken toward the lower component index
inline std::vector<int> classify(const MixtureModel& model) {
    std::vector<int> labels(model.responsibilities.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& row = model.responsibilities[i];
        int arg = 0;
        for (std::size_t k = 1; k < row.size(); ++k)
            if (row[k] > row[arg]) arg = static_cast<int>(k);
        labels[i] = arg;
    }
    return labels;
}

struct PermutationEntry {
    std::vector<std::pair<Family, bool>> families;
    MixtureModel model; // failed=true entries carry the error in model.failure
};

// Fit every ordered G-tuple from the pool with one shared initial
// classification; entries are ranked by BIC with failures last.
inline std::vector<PermutationEntry> permutation_search(
    const std::vector<double>& y1, const std::vector<double>& y2, const Eigen::MatrixXd& X1,
    const Eigen::MatrixXd& X2, const std::vector<std::pair<Family, bool>>& pool, std::size_t g,
    const EmConfig& cfg = {}) {
    if (pool.empty()) throw std::invalid_argument("permutation_search: empty pool");
    std::vector<int> shared_labels;
    if (cfg.init == EmConfig::Init::given_labels) {
        shared_labels = cfg.labels;
    } else if (g == 1) {
        shared_labels.assign(y1.size(), 0);
    } else {
        shared_labels = mixture_detail::ward_labels(y1, y2, g, cfg.seed);
    }
    EmConfig shared_cfg = cfg;
    shared_cfg.init = EmConfig::Init::given_labels;
    shared_cfg.labels = shared_labels;
    shared_cfg.restarts = 1;

    std::vector<PermutationEntry> entries;
    std::vector<std::size_t> idx(g, 0);
    for (;;) {
        PermutationEntry e;
        for (std::size_t k = 0; k < g; ++k) e.families.push_back(pool[idx[k]]);
        try {
            e.model = em_fit(y1, y2, X1, X2, e.families, shared_cfg);
        } catch (const std::exception& ex) {
            e.model.failed = true;
            e.model.failure = ex.what();
            e.model.bic = std::numeric_limits<double>::infinity();
            e.model.aic = std::numeric_limits<double>::infinity();
        }
        entries.push_back(std::move(e));
        // next tuple in lexicographic pool order
        std::size_t k = g;
        while (k > 0) {
            if (++idx[k - 1] < pool.size()) break;
            idx[k - 1] = 0;
            --k;
        }
        if (k == 0) break;
    }
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.model.failed != b.model.failed) return !a.model.failed;
        return a.model.bic < b.model.bic;
    });
    return entries;
}

} // namespace tailblend
