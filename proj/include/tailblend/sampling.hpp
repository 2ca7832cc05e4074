#pragma once

// Seeded simulation: copula samplers (conditional-distribution inversion for
// the Archimedean families, correlated normal/t construction for the
// elliptical ones), the additive bivariate gamma, and mixture dataset
// composition with parametric gamma marginals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "tailblend/copula.hpp"
#include "tailblend/dataset.hpp"
#include "tailblend/math/special.hpp"
#include "tailblend/rng.hpp"

namespace tailblend {

struct BivGammaParams {
    double alpha1 = 1.0, alpha2 = 1.0, alpha3 = 1.0;
    double beta = 1.0; // common rate
};

struct MarginalSpec {
    enum class Kind { gamma } kind = Kind::gamma;
    double shape = 1.0;
    double rate = 1.0;
};

struct MixtureComponentSpec {
    CopulaSpec copula;
    double weight = 1.0;
    MarginalSpec margin1, margin2;
};

struct MixtureSimSpec {
    std::vector<MixtureComponentSpec> components;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

// Apportion n among weights so every count is within one of n*w_k and the
// counts sum to n exactly (largest-remainder rounding, ties to lower index).
inline std::vector<std::size_t> largest_remainder_counts(const std::vector<double>& weights,
                                                        std::size_t n) {
    std::size_t k = weights.size();
    std::vector<std::size_t> counts(k);
    std::vector<std::pair<double, std::size_t>> rem(k);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        double target = static_cast<double>(n) * weights[i];
        counts[i] = static_cast<std::size_t>(std::floor(target));
        rem[i] = {target - std::floor(target), i};
        assigned += counts[i];
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; assigned < n; ++j, ++assigned) counts[rem[j % k].second]++;
    return counts;
}

namespace sampling_detail {

// Invert the conditional CDF h(v|u) = w with bracketed Newton; the
// derivative in v is the copula density.
inline double invert_conditional(const CopulaSpec& base, double u, double w) {
    const double eps = 1e-14;
    double lo = eps, hi = 1.0 - eps;
    double v = w; // the independence-copula solution as a start
    if (v <= lo || v >= hi) v = 0.5;
    for (int it = 0; it < 100; ++it) {
        double h = copula_detail::base_hfun(base, u, v);
        double diff = h - w;
        if (diff > 0.0) hi = v; else lo = v;
        if (std::fabs(diff) < 1e-15 && it > 0) break;
        double dens = std::exp(copula_detail::base_logpdf(base, u, v));
        double vn = (dens > 1e-300 && std::isfinite(dens)) ? v - diff / dens : v;
        if (!(vn > lo && vn < hi)) vn = 0.5 * (lo + hi);
        if (std::fabs(vn - v) <= 1e-10 * std::max(1.0, std::fabs(vn))) { v = vn; break; }
        v = vn;
    }
    return std::min(1.0 - eps, std::max(eps, v));
}

} // namespace sampling_detail

// n i.i.d. draws from the copula, deterministic given the seed. Rotated
// specs return (1-u, 1-v) of base-family draws.
inline std::vector<std::pair<double, double>> sample_copula(const CopulaSpec& spec,
                                                            std::size_t n,
                                                            std::uint64_t seed) {
    validate(spec);
    if (n < 1) throw std::invalid_argument("sample_copula: n must be >= 1");
    CopulaSpec base = spec;
    base.rotated180 = false;
    Rng rng(seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    const double interior = 1.0 - 1e-14;
    auto clamp01 = [&](double x) { return std::min(interior, std::max(1e-14, x)); };
    for (std::size_t i = 0; i < n; ++i) {
        double u, v;
        switch (spec.family) {
            case Family::gaussian: {
                double z1 = rng.normal(), z2 = rng.normal();
                double rho = spec.theta;
                u = math::norm_cdf(z1);
                v = math::norm_cdf(rho * z1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * z2);
                break;
            }
            case Family::student_t: {
                double z1 = rng.normal(), z2 = rng.normal();
                double s = std::sqrt(rng.chi_squared(*spec.df) / *spec.df);
                double rho = spec.theta;
                double x = z1 / s;
                double y = (rho * z1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * z2) / s;
                u = math::t_cdf(x, *spec.df);
                v = math::t_cdf(y, *spec.df);
                break;
            }
            default: {
                u = rng.uniform();
                double w = rng.uniform();
                v = sampling_detail::invert_conditional(base, u, w);
                break;
            }
        }
        u = clamp01(u);
        v = clamp01(v);
        if (spec.rotated180) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        out.emplace_back(u, v);
    }
    return out;
}

// Cheriyan-Ramabhadran additive construction: Y = (X1+X3, X2+X3) with
// independent X_i ~ Gamma(alpha_i, beta).
inline std::vector<std::pair<double, double>> sample_bivariate_gamma(const BivGammaParams& p,
                                                                     std::size_t n,
                                                                     std::uint64_t seed) {
    if (!(p.alpha1 > 0.0 && p.alpha2 > 0.0 && p.alpha3 > 0.0 && p.beta > 0.0))
        throw std::invalid_argument("sample_bivariate_gamma: parameters must be positive");
    if (n < 1) throw std::invalid_argument("sample_bivariate_gamma: n must be >= 1");
    Rng rng(seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x1 = rng.gamma(p.alpha1, p.beta);
        double x2 = rng.gamma(p.alpha2, p.beta);
        double x3 = rng.gamma(p.alpha3, p.beta);
        out.emplace_back(x1 + x3, x2 + x3);
    }
    return out;
}

inline double marginal_quantile(const MarginalSpec& m, double u) {
    return math::gamma_quantile(u, m.shape, m.rate);
}

// Mixture dataset: component counts by largest-remainder rounding, each
// component drawn from its copula under stream derive_seed(seed, k), then
// mapped through the marginal quantile functions. Labels are 1-based.
inline Dataset compose_dataset(const MixtureSimSpec& spec) {
    if (spec.components.empty() || spec.n < 1)
        throw std::invalid_argument("compose_dataset: empty spec");
    double wsum = 0.0;
    std::vector<double> weights;
    for (const auto& c : spec.components) {
        if (c.weight < 0.0) throw std::invalid_argument("compose_dataset: negative weight");
        if (!(c.margin1.shape > 0.0 && c.margin1.rate > 0.0 && c.margin2.shape > 0.0 &&
              c.margin2.rate > 0.0))
            throw std::invalid_argument("compose_dataset: marginal parameters must be positive");
        validate(c.copula);
        weights.push_back(c.weight);
        wsum += c.weight;
    }
    if (std::fabs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("compose_dataset: weights must sum to 1");
    auto counts = largest_remainder_counts(weights, spec.n);
    Dataset d;
    d.y1.reserve(spec.n);
    d.y2.reserve(spec.n);
    d.labels.reserve(spec.n);
    for (std::size_t k = 0; k < spec.components.size(); ++k) {
        if (counts[k] == 0) continue;
        const auto& comp = spec.components[k];
        auto uv = sample_copula(comp.copula, counts[k], derive_seed(spec.seed, k));
        for (auto [u, v] : uv) {
            d.y1.push_back(marginal_quantile(comp.margin1, u));
            d.y2.push_back(marginal_quantile(comp.margin2, v));
            d.labels.push_back(static_cast<int>(k) + 1);
        }
    }
    return d;
}

} // namespace tailblend
