#pragma once

// Canned simulation-study generators:
//   1  additive bivariate gamma BG(1.5, 1.5, 0.5, 0.1), n = 1500
//   2  equal thirds of Joe(1.7), Gumbel(1.5) and survival Clayton(1.3) with
//      gamma(2,1) / gamma(3,1) marginals, n = 1500
//   3  Student t copula tuned to lambda = 0.23 (df = 4) with the same
//      marginals, n = 2000
//   4  two-component mixture of copula regressions: Gumbel(2) and Frank(3)
//      components with gamma-GLM marginals over two standard normal
//      covariates, n = 1000

#include <cstdint>
#include <vector>

#include "tailblend/dataset.hpp"
#include "tailblend/sampling.hpp"

namespace tailblend {

// Dependence parameter of a t copula with the given df whose tail
// coefficient equals lambda.
inline double t_rho_for_lambda(double lambda, double df) {
    double lo = -0.999999, hi = 0.999999;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double lam = tdc({Family::student_t, mid, df}).upper;
        if (lam < lambda) lo = mid; else hi = mid;
        if (hi - lo < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

// Gamma-GLM marginal for mixture-regression simulation: log link over an
// intercept plus the covariate columns.
struct GlmMarginSpec {
    std::vector<double> beta;
    double shape = 1.0;
};

struct RegressionComponentSpec {
    CopulaSpec copula;
    double weight = 1.0;
    GlmMarginSpec margin1, margin2;
};

// Covariates are standard normal draws; component blocks use the same
// derive_seed(seed, k) streams as compose_dataset.
inline Dataset simulate_mixture_regression(const std::vector<RegressionComponentSpec>& comps,
                                           std::size_t n_covariates, std::size_t n,
                                           std::uint64_t seed) {
    std::vector<double> weights;
    for (const auto& c : comps) weights.push_back(c.weight);
    auto counts = largest_remainder_counts(weights, n);

    Dataset d;
    for (std::size_t j = 0; j < n_covariates; ++j) {
        d.covariate_names.push_back("x" + std::to_string(j + 1));
        d.covariates.emplace_back();
    }
    Rng xstream(derive_seed(seed, 0xC0F));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n_covariates; ++j) d.covariates[j].push_back(xstream.normal());

    std::size_t row = 0;
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const auto& comp = comps[k];
        if (counts[k] == 0) continue;
        auto uv = sample_copula(comp.copula, counts[k], derive_seed(seed, k));
        for (auto [u, v] : uv) {
            auto mean_of = [&](const GlmMarginSpec& m) {
                double eta = m.beta[0];
                for (std::size_t j = 0; j + 1 < m.beta.size(); ++j)
                    eta += m.beta[j + 1] * d.covariates[j][row];
                return std::exp(eta);
            };
            double mu1 = mean_of(comp.margin1), mu2 = mean_of(comp.margin2);
            d.y1.push_back(math::gamma_quantile(u, comp.margin1.shape, comp.margin1.shape / mu1));
            d.y2.push_back(math::gamma_quantile(v, comp.margin2.shape, comp.margin2.shape / mu2));
            d.labels.push_back(static_cast<int>(k) + 1);
            ++row;
        }
    }
    return d;
}

inline std::vector<RegressionComponentSpec> study4_components() {
    return {
        {{Family::gumbel, 2.0}, 0.5, {{1.0, 0.1, 0.1}, 6.0}, {{2.0, 0.2, 0.2}, 3.0}},
        {{Family::frank, 3.0}, 0.5, {{0.8, 0.2, 0.2}, 2.0}, {{0.8, 0.2, 0.2}, 2.0}},
    };
}

inline MixtureSimSpec study2_sim_spec(std::uint64_t seed, std::size_t n = 1500) {
    MarginalSpec g21{MarginalSpec::Kind::gamma, 2.0, 1.0};
    MarginalSpec g31{MarginalSpec::Kind::gamma, 3.0, 1.0};
    MixtureSimSpec spec;
    spec.components = {
        {{Family::joe, 1.7}, 1.0 / 3.0, g21, g31},
        {{Family::gumbel, 1.5}, 1.0 / 3.0, g21, g31},
        {{Family::clayton, 1.3, {}, true}, 1.0 / 3.0, g21, g31},
    };
    spec.n = n;
    spec.seed = seed;
    return spec;
}

inline Dataset simulate_study(int study, std::uint64_t seed, std::size_t n_override = 0) {
    switch (study) {
        case 1: {
            std::size_t n = n_override ? n_override : 1500;
            auto pts = sample_bivariate_gamma({1.5, 1.5, 0.5, 0.1}, n, seed);
            Dataset d;
            for (auto [a, b] : pts) {
                d.y1.push_back(a);
                d.y2.push_back(b);
            }
            return d;
        }
        case 2: {
            std::size_t n = n_override ? n_override : 1500;
            return compose_dataset(study2_sim_spec(seed, n));
        }
        case 3: {
            std::size_t n = n_override ? n_override : 2000;
            MarginalSpec g21{MarginalSpec::Kind::gamma, 2.0, 1.0};
            MarginalSpec g31{MarginalSpec::Kind::gamma, 3.0, 1.0};
            MixtureSimSpec spec;
            spec.components = {{{Family::student_t, t_rho_for_lambda(0.23, 4.0), 4.0}, 1.0, g21, g31}};
            spec.n = n;
            spec.seed = seed;
            Dataset d = compose_dataset(spec);
            d.labels.clear();
            return d;
        }
        case 4: {
            std::size_t n = n_override ? n_override : 1000;
            return simulate_mixture_regression(study4_components(), 2, n, seed);
        }
        default:
            throw std::invalid_argument("simulate_study: study must be 1..4");
    }
}

} // namespace tailblend
