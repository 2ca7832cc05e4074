// Acceptance suite: reproduces the published quantities end to end and
// prints one pass/fail line per criterion. Exit code is the number of
// failed criteria.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "tailblend/bma.hpp"
#include "tailblend/empirical.hpp"
#include "tailblend/fitting.hpp"
#include "tailblend/mixture.hpp"
#include "tailblend/sampling.hpp"
#include "tailblend/studies.hpp"

using namespace tailblend;

namespace {

int failures = 0;

void report_line(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

Eigen::MatrixXd study4_design(const Dataset& d) {
    Eigen::MatrixXd X(d.size(), 3);
    for (std::size_t i = 0; i < d.size(); ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = d.covariates[0][i];
        X(i, 2) = d.covariates[1][i];
    }
    return X;
}

// ---------------------------------------------------------------------------

void criterion1() {
    Timer t;
    double joe = tdc({Family::joe, 1.7}).upper;
    double gum = tdc({Family::gumbel, 1.5}).upper;
    double scl = tdc({Family::clayton, 1.3, {}, true}).upper;
    MixtureModel m;
    m.g = 3;
    m.mixing = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    m.components = {{{Family::joe, 1.7}, {}, {}},
                    {{Family::gumbel, 1.5}, {}, {}},
                    {{Family::clayton, 1.3, {}, true}, {}, {}}};
    double mix = mixture_tdc(m).upper;
    bool pass = std::fabs(joe - 0.497) < 1e-3 && std::fabs(gum - 0.413) < 1e-3 &&
                std::fabs(scl - 0.587) < 1e-3 && std::fabs(mix - 0.499) < 1e-3;
    report_line(1, "analytic TDCs of the study-II copulas and their equal mix", pass,
                fmt("joe=%.4f gumbel=%.4f sclayton=%.4f mix=%.4f, %.2fs", joe, gum, scl, mix,
                    t.seconds()));
}

void criterion2() {
    Timer t;
    auto w = bma_weights({-506.92, -503.38, -503.76});
    bool pass = std::fabs(w[0] - 0.73) < 0.01 && std::fabs(w[1] - 0.12) < 0.01 &&
                std::fabs(w[2] - 0.15) < 0.01;
    report_line(2, "BMA weights from the published BIC triple", pass,
                fmt("w=(%.4f, %.4f, %.4f), %.2fs", w[0], w[1], w[2], t.seconds()));
}

void criterion3() {
    Timer t;
    auto w = bma_weights({-506.92, -503.38, -503.76});
    std::vector<TdcPair> tdcs = {{0.0, 0.53}, {0.0, 0.42}, {0.0, 0.48}};
    double blend = tdc_method1(tdcs, w).upper;
    bool pass = std::fabs(blend - 0.505) < 0.01;
    report_line(3, "method-1 blend of the published fit table", pass,
                fmt("lambda_U=%.4f, %.2fs", blend, t.seconds()));
}

void criterion4() {
    Timer t;
    const int seeds = 200;
    auto pool = default_pool();
    std::vector<double> mean_weight(pool.size(), 0.0);
    double mean_blend = 0.0;
    for (int s = 1; s <= seeds; ++s) {
        auto d = simulate_study(2, 1000 + s);
        auto ps = pseudo_observations(d.y1, d.y2);
        auto fits = fit_pool_mple(ps, pool);
        auto ens = make_ensemble(fits);
        for (std::size_t k = 0; k < pool.size(); ++k) mean_weight[k] += ens.weights[k];
        mean_blend += ens.blended_tdc_m1.upper;
    }
    for (double& w : mean_weight) w /= seeds;
    mean_blend /= seeds;

    bool pass = std::fabs(mean_blend - 0.499) <= 0.03;
    std::string heavy;
    for (std::size_t k = 0; k < pool.size(); ++k) {
        auto [fam, rot] = pool[k];
        bool generating = (fam == Family::joe && !rot) || (fam == Family::gumbel && !rot) ||
                          (fam == Family::clayton && rot);
        if (!generating && mean_weight[k] >= 0.01) {
            pass = false;
            heavy += " " + spec_name({fam, 1.0, {}, rot});
        }
    }
    report_line(4, "study II over 200 seeds: weights concentrate, blend near truth", pass,
                fmt("mean lambda_U=%.4f joe=%.3f gumbel=%.3f sclayton=%.3f stray=[%s], %.0fs",
                    mean_blend, mean_weight[0], mean_weight[2], mean_weight[5], heavy.c_str(),
                    t.seconds()));
}

void criterion5() {
    Timer t;
    const int seeds = 20;
    int good = 0;
    double last_w = 0.0, last_tdc = 0.0;
    for (int s = 1; s <= seeds; ++s) {
        auto d = simulate_study(3, 3000 + s);
        auto ps = pseudo_observations(d.y1, d.y2);
        auto fits = fit_pool_mple(ps);
        auto ens = make_ensemble(fits);
        double tw = 0.0, ttdc = 0.0;
        for (std::size_t k = 0; k < fits.size(); ++k) {
            if (fits[k].spec.family == Family::student_t) {
                tw = ens.weights[k];
                ttdc = fits[k].tdc_pair.upper;
            }
        }
        last_w = tw;
        last_tdc = ttdc;
        if (tw > 0.99 && std::fabs(ttdc - 0.22) <= 0.03) ++good;
    }
    bool pass = good >= static_cast<int>(0.9 * seeds);
    report_line(5, "t-copula data: t takes the weight and nails the TDC", pass,
                fmt("good=%d/%d last w=%.4f lambda=%.3f, %.0fs", good, seeds, last_w, last_tdc,
                    t.seconds()));
}

void criterion6() {
    Timer t;
    // one study-II data set, full pool fit, then 1000 method-2 repetitions
    auto d = simulate_study(2, 20260806);
    auto ps = pseudo_observations(d.y1, d.y2);
    auto fits = fit_pool_mple(ps);
    auto ens = make_ensemble(fits);
    Method2Config cfg;
    cfg.reps = 1000;
    cfg.seed = 606;
    auto res = tdc_method2(ens, d.size(), cfg, &ps);

    const std::array<double, 5> mean_ref = {0.535, 0.521, 0.505, 0.476, 0.505};
    const std::array<double, 5> sd_ref = {0.07, 0.07, 0.07, 0.04, 0.07};
    bool pass = true;
    std::string detail;
    for (int k = 0; k < 5; ++k) {
        if (std::fabs(res.mean_upper[k] - mean_ref[k]) > 0.03) pass = false;
        if (std::fabs(res.sd_upper[k] - sd_ref[k]) > 0.02) pass = false;
        detail += fmt("e%d=%.3f(%.3f) ", k + 1, res.mean_upper[k], res.sd_upper[k]);
    }
    report_line(6, "method-2 estimator means and sds on study II", pass,
                detail + fmt("%.0fs", t.seconds()));
}

void criterion7() {
    Timer t;
    const int seeds = 100;
    int w_ok = 0, l2_ok = 0;
    for (int s = 1; s <= seeds; ++s) {
        auto d = simulate_study(2, 7000 + s);
        auto ps = pseudo_observations(d.y1, d.y2);
        auto fits = fit_pool_mple(ps);
        auto ens = make_ensemble(fits);

        auto bma_rep = sample_bma_replicate(ens, d.size(), derive_seed(7000 + s, 1));
        std::size_t best = 0;
        for (std::size_t k = 1; k < ens.weights.size(); ++k)
            if (ens.weights[k] > ens.weights[best]) best = k;
        auto single = sample_member(ens.members[best], d.size(), derive_seed(7000 + s, 2));

        DistancePair db = set_distance(ps, bma_rep);
        DistancePair ds = set_distance(ps, single);
        if (db.wasserstein <= ds.wasserstein) ++w_ok;
        if (db.l2_star <= ds.l2_star) ++l2_ok;
    }
    bool pass = w_ok >= 70 && l2_ok >= 70;
    report_line(7, "BMA replicate at least as close as the best single copula", pass,
                fmt("wasserstein %d/100, l2* %d/100, %.0fs", w_ok, l2_ok, t.seconds()));
}

void criterion8() {
    Timer t;
    const int seeds = 20;
    std::vector<std::pair<Family, bool>> pool = {{Family::gumbel, false},
                                                 {Family::frank, false},
                                                 {Family::clayton, false},
                                                 {Family::gaussian, false}};
    int rank_ok = 0, recover_ok = 0;
    double last_mis = 0.0;
    for (int s = 1; s <= seeds; ++s) {
        auto d = simulate_study(4, 8000 + s);
        Eigen::MatrixXd X = study4_design(d);
        EmConfig cfg;
        cfg.seed = 8000 + s;
        auto entries = permutation_search(d.y1, d.y2, X, X, pool, 2, cfg);
        const auto& best = entries.front();
        if (!best.model.failed) {
            Family a = best.families[0].first, b = best.families[1].first;
            if ((a == Family::gumbel && b == Family::frank) ||
                (a == Family::frank && b == Family::gumbel))
                ++rank_ok;
        }

        // parameter recovery of the generating (gumbel, frank) fit
        auto model = em_fit(d.y1, d.y2, X, X, {{Family::gumbel, false}, {Family::frank, false}},
                            cfg);
        double tau0 = model.mixing[0];
        double th_g = model.components[0].copula.theta;
        double th_f = model.components[1].copula.theta;
        auto labels = classify(model);
        std::size_t mis_a = 0, mis_b = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            int truth = d.labels[i] - 1;
            if (labels[i] != truth) ++mis_a;
            if (1 - labels[i] != truth) ++mis_b;
        }
        double mis = static_cast<double>(std::min(mis_a, mis_b)) / labels.size();
        last_mis = mis;
        bool ok = std::fabs(tau0 - 0.5) <= 0.05 && th_g >= 1.6 && th_g <= 2.3 && th_f >= 2.8 &&
                  th_f <= 4.5 && std::fabs(mis - 0.14) <= 0.04;
        if (ok) ++recover_ok;
    }
    bool pass = rank_ok >= static_cast<int>(0.8 * seeds) &&
                recover_ok >= static_cast<int>(0.8 * seeds);
    report_line(8, "EM recovery and permutation ranking on study 4", pass,
                fmt("rank %d/%d recovery %d/%d last mis=%.3f, %.0fs", rank_ok, seeds, recover_ok,
                    seeds, last_mis, t.seconds()));
}

void criterion9() {
    Timer t;
    bool pass = true;
    std::string detail;

    // density normalization 1 +- 1e-3 on a 200x200 midpoint grid
    {
        std::vector<CopulaSpec> specs = {{Family::joe, 1.7},   {Family::gumbel, 1.5},
                                         {Family::clayton, 1.3}, {Family::clayton, 1.3, {}, true},
                                         {Family::frank, 3.0},   {Family::gaussian, 0.5},
                                         {Family::student_t, 0.5, 5.0}};
        const int m = 200;
        for (const auto& s : specs) {
            double sum = 0.0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    sum += std::exp(log_density(s, (i + 0.5) / m, (j + 0.5) / m));
            double integral = sum / double(m) / double(m);
            if (std::fabs(integral - 1.0) > 1e-3) {
                pass = false;
                detail += " density:" + spec_name(s);
            }
        }
    }

    // 2-increasing rectangle masses on a 20x20 lattice
    {
        std::vector<CopulaSpec> specs = {{Family::joe, 2.5},   {Family::gumbel, 1.5},
                                         {Family::clayton, 4.0, {}, true}, {Family::frank, -6.0},
                                         {Family::gaussian, 0.9}, {Family::student_t, -0.4, 4.0}};
        const int m = 20;
        for (const auto& s : specs) {
            std::vector<double> c((m + 1) * (m + 1));
            for (int i = 0; i <= m; ++i)
                for (int j = 0; j <= m; ++j) c[i * (m + 1) + j] = cdf(s, i / 20.0, j / 20.0);
            for (int i = 1; i <= m; ++i)
                for (int j = 1; j <= m; ++j) {
                    double mass = c[i * (m + 1) + j] - c[(i - 1) * (m + 1) + j] -
                                  c[i * (m + 1) + j - 1] + c[(i - 1) * (m + 1) + j - 1];
                    if (mass < -1e-12) {
                        pass = false;
                        detail += " 2incr:" + spec_name(s);
                        i = m + 1;
                        break;
                    }
                }
        }
    }

    // rank invariance and rotation duality of the empirical estimators
    {
        auto pts = sample_copula({Family::gumbel, 1.7}, 400, 90001);
        std::vector<double> y1, y2, t1, t2, n1, n2;
        for (auto [u, v] : pts) {
            y1.push_back(u);
            y2.push_back(v);
            t1.push_back(std::exp(4.0 * u));
            t2.push_back(v * v * v + v);
            n1.push_back(-u);
            n2.push_back(-v);
        }
        auto ps = pseudo_observations(y1, y2);
        auto pt = pseudo_observations(t1, t2);
        auto ngt = pseudo_observations(n1, n2);
        for (int id = 1; id <= 5; ++id) {
            for (Tail tail : {Tail::lower, Tail::upper}) {
                if (estimate_tdc_empirical(ps, id, tail).value !=
                    estimate_tdc_empirical(pt, id, tail).value) {
                    pass = false;
                    detail += fmt(" rankinv:e%d", id);
                }
            }
            if (estimate_tdc_empirical(ngt, id, Tail::upper).value !=
                estimate_tdc_empirical(ps, id, Tail::lower).value) {
                pass = false;
                detail += fmt(" rotdual:e%d", id);
            }
        }
    }

    // method-1 convexity
    {
        std::vector<TdcPair> tdcs = {{0.0, 0.497}, {0.0, 0.413}, {0.0, 0.587}};
        Rng rng(90002);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> w = {rng.uniform(), rng.uniform(), rng.uniform()};
            double tot = w[0] + w[1] + w[2];
            for (double& x : w) x /= tot;
            double blend = tdc_method1(tdcs, w).upper;
            if (blend < 0.413 || blend > 0.587) {
                pass = false;
                detail += " convexity";
                break;
            }
        }
    }

    // monotone EM log-likelihood
    {
        auto d = simulate_study(4, 90003, 600);
        Eigen::MatrixXd X = study4_design(d);
        EmConfig cfg;
        cfg.seed = 90003;
        auto model = em_fit(d.y1, d.y2, X, X, {{Family::gumbel, false}, {Family::frank, false}},
                            cfg);
        for (std::size_t i = 1; i < model.loglik_trace.size(); ++i) {
            if (model.loglik_trace[i] <
                model.loglik_trace[i - 1] - 1e-9 * (1.0 + std::fabs(model.loglik_trace[i - 1]))) {
                pass = false;
                detail += " monotone-em";
                break;
            }
        }
    }

    report_line(9, "property suites: normalization, 2-increasing, invariances, EM", pass,
                (detail.empty() ? std::string("all properties hold") : detail) +
                    fmt(", %.0fs", t.seconds()));
}

} // namespace

int main() {
    std::printf("tailblend acceptance suite\n");
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}
