// tailblend: fit copula pools to bivariate loss data, blend tail dependence
// estimates with BIC-based model averaging, benchmark against nonparametric
// estimators, and fit finite mixtures of copula regressions.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 fit failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tailblend/bma.hpp"
#include "tailblend/dataset.hpp"
#include "tailblend/empirical.hpp"
#include "tailblend/errors.hpp"
#include "tailblend/fitting.hpp"
#include "tailblend/mixture.hpp"
#include "tailblend/report.hpp"
#include "tailblend/sampling.hpp"
#include "tailblend/studies.hpp"

using namespace tailblend;
using report::json;

namespace {

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("TAILBLEND_SEED")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return static_cast<std::uint64_t>(v);
        throw CLI::ValidationError("TAILBLEND_SEED", "must be a nonnegative integer");
    }
    return 0;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::pair<Family, bool> parse_family(const std::string& name) {
    std::string base = name;
    bool rotated = false;
    if (base.rfind("survival_", 0) == 0) {
        rotated = true;
        base = base.substr(9);
    }
    return {report::family_from_name(base), rotated};
}

std::vector<std::pair<Family, bool>> parse_pool(const std::string& families) {
    if (families == "all") return default_pool();
    std::vector<std::pair<Family, bool>> pool;
    for (const auto& name : split_list(families)) pool.push_back(parse_family(name));
    if (pool.empty()) throw CLI::ValidationError("--families", "no families given");
    return pool;
}

MarginalSpec parse_margin(const std::string& s) {
    // gamma:shape,rate
    auto colon = s.find(':');
    std::string kind = s.substr(0, colon == std::string::npos ? s.size() : colon);
    if (kind != "gamma") throw CLI::ValidationError("--margin", "only gamma margins supported");
    if (colon == std::string::npos) throw CLI::ValidationError("--margin", "expected gamma:shape,rate");
    auto parts = split_list(s.substr(colon + 1));
    if (parts.size() != 2) throw CLI::ValidationError("--margin", "expected gamma:shape,rate");
    MarginalSpec m;
    m.shape = std::stod(parts[0]);
    m.rate = std::stod(parts[1]);
    return m;
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write: " + path);
    out << text;
    if (!out) throw DataError("write failed: " + path);
}

void emit_report(const json& rep, const std::string& path) {
    std::ostringstream ss;
    report::render_report(rep, ss);
    write_text(path, ss.str());
}

struct ColumnPair {
    std::string y1 = "y1", y2 = "y2";
};

ColumnPair parse_columns(const std::string& s) {
    auto parts = split_list(s);
    if (parts.size() != 2) throw CLI::ValidationError("--columns", "expected two names");
    return {parts[0], parts[1]};
}

Eigen::MatrixXd design_matrix(const Dataset& d, const std::vector<std::string>& covariates) {
    Eigen::MatrixXd X(d.size(), 1 + covariates.size());
    X.col(0).setOnes();
    for (std::size_t c = 0; c < covariates.size(); ++c) {
        auto it = std::find(d.covariate_names.begin(), d.covariate_names.end(), covariates[c]);
        if (it == d.covariate_names.end()) throw DataError("covariate column not loaded: " + covariates[c]);
        std::size_t idx = static_cast<std::size_t>(it - d.covariate_names.begin());
        for (std::size_t i = 0; i < d.size(); ++i) X(i, 1 + c) = d.covariates[idx][i];
    }
    return X;
}

// --------------------------------------------------------------------------
// subcommand handlers
// --------------------------------------------------------------------------

int run_simulate(int study, std::size_t n, std::uint64_t seed, const std::string& out,
                 const std::string& copula_name, double theta, double df, bool rotated,
                 const std::string& margin1, const std::string& margin2) {
    Dataset d;
    if (study > 0) {
        d = simulate_study(study, seed, n);
    } else {
        if (copula_name.empty())
            throw CLI::ValidationError("simulate", "need --study or --copula");
        auto [fam, rot_from_name] = parse_family(copula_name);
        CopulaSpec spec{fam, theta,
                        fam == Family::student_t ? std::optional<double>(df) : std::nullopt,
                        rotated || rot_from_name};
        MixtureSimSpec sim;
        sim.components = {{spec, 1.0, parse_margin(margin1), parse_margin(margin2)}};
        sim.n = n ? n : 1500;
        sim.seed = seed;
        d = compose_dataset(sim);
        d.labels.clear();
    }
    std::ostringstream ss;
    write_dataset_csv(d, ss);
    write_text(out, ss.str());
    return 0;
}

int run_tdc_empirical(const std::string& in, const std::string& columns,
                      const std::string& estimators, const std::string& out) {
    auto cols = parse_columns(columns);
    Dataset d = load_dataset(in, cols.y1, cols.y2);
    auto ps = pseudo_observations(d.y1, d.y2);
    std::vector<TdcEstimate> estimates;
    for (const auto& tok : split_list(estimators)) {
        int id = std::stoi(tok);
        estimates.push_back(estimate_tdc_empirical(ps, id, Tail::lower));
        estimates.push_back(estimate_tdc_empirical(ps, id, Tail::upper));
    }
    json rep;
    rep["meta"] = report::meta_block("tdc-empirical", 0, d.size(), d.rows_rejected);
    rep["empirical"] = report::empirical_block(estimates);
    emit_report(rep, out);
    return 0;
}

int run_fit(const std::string& in, const std::string& columns, const std::string& families,
            const std::string& method, const std::string& covariates, const std::string& out) {
    auto cols = parse_columns(columns);
    auto covs = split_list(covariates);
    Dataset d = load_dataset(in, cols.y1, cols.y2, covs);
    auto pool = parse_pool(families);

    std::vector<FitRecord> fits;
    if (method == "mple") {
        auto ps = pseudo_observations(d.y1, d.y2);
        fits = fit_pool_mple(ps, pool);
    } else if (method == "ifm") {
        for (double y : d.y1)
            if (!(y > 0.0)) throw DataError("ifm needs strictly positive responses");
        for (double y : d.y2)
            if (!(y > 0.0)) throw DataError("ifm needs strictly positive responses");
        Eigen::MatrixXd X = design_matrix(d, covs);
        for (auto [fam, rot] : pool) {
            try {
                fits.push_back(fit_copula_ifm(fam, rot, d.y1, d.y2, X, X).record);
            } catch (const std::exception&) {
                FitRecord bad;
                bad.spec = {fam, fam == Family::gaussian || fam == Family::student_t ? 0.0 : 1.0,
                            fam == Family::student_t ? std::optional<double>(10.0) : std::nullopt,
                            rot};
                bad.loglik = -std::numeric_limits<double>::infinity();
                bad.bic = bad.aic = std::numeric_limits<double>::infinity();
                bad.n_obs = d.size();
                bad.converged = false;
                fits.push_back(bad);
            }
        }
    } else {
        throw CLI::ValidationError("--method", "must be mple or ifm");
    }

    bool any_ok = false;
    for (const auto& f : fits) any_ok = any_ok || f.converged;
    if (!any_ok) throw FitError("all copula fits failed");

    std::vector<double> bics;
    for (const auto& f : fits) bics.push_back(f.bic);
    auto weights = bma_weights(bics);

    json rep;
    rep["meta"] = report::meta_block("fit-" + method, 0, d.size(), d.rows_rejected);
    rep["fits"] = report::fits_block(fits, weights);
    emit_report(rep, out);
    return 0;
}

int run_bma(const std::string& in, const std::string& columns, const std::string& fits_path,
            int method, std::size_t reps, std::size_t distance_reps, std::uint64_t seed,
            const std::string& out) {
    auto cols = parse_columns(columns);
    Dataset d = load_dataset(in, cols.y1, cols.y2);
    json fits_doc = report::load_report(fits_path);
    if (!fits_doc.contains("fits")) throw DataError("no fit table in " + fits_path);
    auto fits = report::fits_from_block(fits_doc["fits"]);
    if (fits.empty()) throw DataError("empty fit table in " + fits_path);
    for (const auto& f : fits)
        if (f.n_obs != d.size())
            throw DataError("fit table sample size does not match the data");

    std::vector<double> bics;
    for (const auto& f : fits) bics.push_back(f.bic);
    auto weights = bma_weights(bics);

    json rep;
    rep["meta"] = report::meta_block("bma-method" + std::to_string(method), seed, d.size(),
                                     d.rows_rejected);
    rep["fits"] = report::fits_block(fits, weights);

    std::vector<TdcPair> tdcs;
    for (const auto& f : fits) tdcs.push_back(f.tdc_pair);
    rep["method1"] = report::tdc_block(tdc_method1(tdcs, weights));

    if (method == 2) {
        auto ps = pseudo_observations(d.y1, d.y2);
        auto ensemble = make_ensemble(fits);
        Method2Config cfg;
        cfg.reps = reps;
        cfg.seed = seed;
        cfg.distance_reps = distance_reps;
        auto res = tdc_method2(ensemble, d.size(), cfg, &ps);
        json m2 = report::method2_block(res);
        // distance comparison against the highest-weight single model
        std::size_t best = 0;
        for (std::size_t k = 1; k < weights.size(); ++k)
            if (weights[k] > weights[best]) best = k;
        auto single = sample_member(ensemble.members[best], d.size(), derive_seed(seed, 0x51));
        m2["distances"]["best_single"] = report::distance_block(set_distance(ps, single));
        m2["best_single_model"] = spec_name(fits[best].spec);
        rep["method2"] = m2;
    } else if (method != 1) {
        throw CLI::ValidationError("--method", "must be 1 or 2");
    }
    emit_report(rep, out);
    return 0;
}

int run_mixture(const std::string& in, const std::string& columns, const std::string& covariates,
                const std::string& label_col, std::size_t g, const std::string& families,
                std::uint64_t seed, double epsilon, int max_iter, const std::string& out) {
    auto cols = parse_columns(columns);
    auto covs = split_list(covariates);
    Dataset d = load_dataset(in, cols.y1, cols.y2, covs, label_col);
    auto pool = parse_pool(families);
    Eigen::MatrixXd X = design_matrix(d, covs);

    EmConfig cfg;
    cfg.seed = seed;
    cfg.epsilon = epsilon;
    cfg.max_iter = max_iter;

    std::vector<PermutationEntry> entries;
    std::size_t g_used = g;
    if (g == 0) {
        // choose G in {1,2,3} by the best AIC among each sweep's models
        double best_aic = std::numeric_limits<double>::infinity();
        std::vector<PermutationEntry> best_entries;
        for (std::size_t gg = 1; gg <= 3; ++gg) {
            if (d.size() < 20 * gg) break;
            auto e = permutation_search(d.y1, d.y2, X, X, pool, gg, cfg);
            double aic = std::numeric_limits<double>::infinity();
            for (const auto& m : e)
                if (!m.model.failed) aic = std::min(aic, m.model.aic);
            if (aic < best_aic - 1e-6) {
                best_aic = aic;
                best_entries = std::move(e);
                g_used = gg;
            }
        }
        entries = std::move(best_entries);
    } else {
        entries = permutation_search(d.y1, d.y2, X, X, pool, g, cfg);
    }
    if (entries.empty() || entries.front().model.failed) throw FitError("all mixture fits failed");

    std::vector<double> bics;
    for (const auto& e : entries) bics.push_back(e.model.failed
                                                     ? std::numeric_limits<double>::infinity()
                                                     : e.model.bic);
    auto weights = bma_weights(bics);

    json mix;
    mix["g"] = g_used;
    mix["n_models"] = entries.size();
    json ranking = json::array();
    for (std::size_t k = 0; k < entries.size(); ++k)
        ranking.push_back(report::mixture_entry(entries[k], weights[k]));
    mix["ranking"] = ranking;

    // method-1 blend across mixture models
    TdcPair blended{0.0, 0.0};
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (entries[k].model.failed) continue;
        TdcPair t = mixture_tdc(entries[k].model);
        blended.lower += weights[k] * t.lower;
        blended.upper += weights[k] * t.upper;
    }
    mix["method1"] = report::tdc_block(blended);

    // classification summary of the best model
    const auto& best = entries.front().model;
    auto labels = classify(best);
    std::vector<std::size_t> counts(best.g, 0);
    for (int l : labels) counts[l]++;
    json cls;
    cls["counts"] = counts;
    if (!d.labels.empty()) {
        // best matching of model labels to true labels over permutations
        std::vector<int> truth(d.labels.begin(), d.labels.end());
        int tmin = *std::min_element(truth.begin(), truth.end());
        for (int& t : truth) t -= tmin;
        std::vector<int> perm(best.g);
        std::iota(perm.begin(), perm.end(), 0);
        std::size_t best_match = 0;
        do {
            std::size_t match = 0;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (perm[labels[i]] == truth[i]) ++match;
            best_match = std::max(best_match, match);
        } while (std::next_permutation(perm.begin(), perm.end()));
        cls["misclassification"] =
            report::sig6(1.0 - static_cast<double>(best_match) / labels.size());
    }
    mix["classification"] = cls;

    json rep;
    rep["meta"] = report::meta_block("mixture", seed, d.size(), d.rows_rejected);
    rep["mixture"] = mix;
    emit_report(rep, out);
    return 0;
}

int run_report(const std::vector<std::string>& inputs, const std::string& out) {
    json merged;
    for (const auto& path : inputs) {
        json part = report::load_report(path);
        for (auto& [key, value] : part.items()) merged[key] = value;
    }
    // round-trip check: serialized output parses back to an equal document
    std::ostringstream ss;
    report::render_report(merged, ss);
    json back = json::parse(ss.str());
    if (back != merged) throw DataError("report round-trip mismatch");
    write_text(out, ss.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bivariate tail dependence: copula pools, BMA blending, mixtures"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a study preset or custom dataset");
    int study = 0;
    std::size_t n = 0;
    std::optional<std::uint64_t> seed_flag;
    std::string out = "-", copula_name, margin1 = "gamma:2,1", margin2 = "gamma:3,1";
    double theta = 1.5, df = 4.0;
    bool rotated = false;
    sim->add_option("--study", study, "study preset 1..4")->check(CLI::Range(1, 4));
    sim->add_option("--n", n, "sample size override");
    sim->add_option("--seed", seed_flag, "RNG seed (env TAILBLEND_SEED)");
    sim->add_option("--out", out, "output CSV path, - for stdout");
    sim->add_option("--copula", copula_name, "custom copula family");
    sim->add_option("--theta", theta, "custom copula parameter");
    sim->add_option("--df", df, "t-copula degrees of freedom");
    sim->add_flag("--rotated", rotated, "use the 180-degree rotated copula");
    sim->add_option("--margin1", margin1, "margin 1 spec, gamma:shape,rate");
    sim->add_option("--margin2", margin2, "margin 2 spec, gamma:shape,rate");

    // tdc-empirical
    auto* emp = app.add_subcommand("tdc-empirical", "nonparametric TDC estimators 1..5");
    std::string in, columns = "y1,y2", estimators = "1,2,3,4,5";
    emp->add_option("--in", in, "input CSV")->required();
    emp->add_option("--columns", columns, "y column names");
    emp->add_option("--estimators", estimators, "estimator ids");
    emp->add_option("--out", out, "report path, - for stdout");

    // fit
    auto* fit = app.add_subcommand("fit", "fit a copula pool by mple or ifm");
    std::string families = "all", method = "mple", covariates;
    fit->add_option("--in", in, "input CSV")->required();
    fit->add_option("--columns", columns, "y column names");
    fit->add_option("--families", families, "copula pool, all or a comma list");
    fit->add_option("--method", method, "mple or ifm");
    fit->add_option("--covariates", covariates, "covariate columns for ifm margins");
    fit->add_option("--out", out, "fit report path, - for stdout");

    // bma
    auto* bma_cmd = app.add_subcommand("bma", "blend a fitted pool: method 1 or 2");
    std::string fits_path;
    int bma_method = 1;
    std::size_t reps = 1000, distance_reps = 1;
    bma_cmd->add_option("--in", in, "input CSV")->required();
    bma_cmd->add_option("--columns", columns, "y column names");
    bma_cmd->add_option("--fits", fits_path, "fit report from the fit subcommand")->required();
    bma_cmd->add_option("--method", bma_method, "1 = direct blend, 2 = proportional simulation");
    bma_cmd->add_option("--reps", reps, "method-2 repetitions");
    bma_cmd->add_option("--distance-reps", distance_reps, "replicates in distance diagnostics");
    bma_cmd->add_option("--seed", seed_flag, "RNG seed (env TAILBLEND_SEED)");
    bma_cmd->add_option("--out", out, "report path, - for stdout");

    // mixture
    auto* mixc = app.add_subcommand("mixture", "finite mixture of copula regressions by EM");
    std::size_t g = 2;
    std::string label_col;
    double epsilon = 1e-5;
    int max_iter = 500;
    mixc->add_option("--in", in, "input CSV")->required();
    mixc->add_option("--columns", columns, "y column names");
    mixc->add_option("--covariates", covariates, "covariate columns for the marginal GLMs");
    mixc->add_option("--labels", label_col, "true label column for misclassification");
    mixc->add_option("--g", g, "components; 0 selects G in 1..3 by AIC");
    mixc->add_option("--families", families, "copula pool, all or a comma list");
    mixc->add_option("--seed", seed_flag, "RNG seed (env TAILBLEND_SEED)");
    mixc->add_option("--epsilon", epsilon, "EM relative log-likelihood stop");
    mixc->add_option("--max-iter", max_iter, "EM iteration cap");
    mixc->add_option("--out", out, "report path, - for stdout");

    // report
    auto* repc = app.add_subcommand("report", "merge and validate report files");
    std::vector<std::string> inputs;
    repc->add_option("--in", inputs, "input report JSONs")->required();
    repc->add_option("--out", out, "merged report path, - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return run_simulate(study, n, resolve_seed(seed_flag), out, copula_name, theta, df,
                                rotated, margin1, margin2);
        if (emp->parsed()) return run_tdc_empirical(in, columns, estimators, out);
        if (fit->parsed()) return run_fit(in, columns, families, method, covariates, out);
        if (bma_cmd->parsed())
            return run_bma(in, columns, fits_path, bma_method, reps, distance_reps,
                           resolve_seed(seed_flag), out);
        if (mixc->parsed())
            return run_mixture(in, columns, covariates, label_col, g, families,
                               resolve_seed(seed_flag), epsilon, max_iter, out);
        if (repc->parsed()) return run_report(inputs, out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
