#pragma once

// Structured JSON reports mirroring the fit/empirical/BMA/mixture summary
// tables. Serialization is deterministic: object keys are sorted and every
// floating-point value is rounded to 6 significant digits before insertion.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailblend/bma.hpp"
#include "tailblend/errors.hpp"
#include "tailblend/fitting.hpp"
#include "tailblend/mixture.hpp"

namespace tailblend::report {

using json = nlohmann::json;

inline constexpr const char* version = "0.1.0";

// nearest double to the 6-significant-digit decimal; its shortest round-trip
// form prints as that decimal
inline double sig6(double x) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::strtod(buf, nullptr);
}

inline json meta_block(const std::string& command, std::uint64_t seed, std::size_t n,
                       std::size_t rows_rejected = 0) {
    json m;
    m["command"] = command;
    m["seed"] = seed;
    m["n"] = n;
    m["version"] = version;
    if (rows_rejected > 0) m["rows_rejected"] = rows_rejected;
    return m;
}

// Fit table with BMA weights; weights below 1e-6 are reported as zero.
inline json fits_block(const std::vector<FitRecord>& fits, const std::vector<double>& weights) {
    json arr = json::array();
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const FitRecord& f = fits[k];
        json row;
        row["model"] = family_name(f.spec.family);
        row["rotated"] = f.spec.rotated180;
        row["theta"] = sig6(f.spec.theta);
        if (f.spec.df) row["df"] = sig6(*f.spec.df);
        row["loglik"] = sig6(f.loglik);
        row["n_params"] = f.n_params;
        row["n_obs"] = f.n_obs;
        row["aic"] = sig6(f.aic);
        row["bic"] = sig6(f.bic);
        row["weight"] = sig6(weights[k] < 1e-6 ? 0.0 : weights[k]);
        row["lambda_lower"] = sig6(f.tdc_pair.lower);
        row["lambda_upper"] = sig6(f.tdc_pair.upper);
        row["converged"] = f.converged;
        if (f.at_boundary) row["at_boundary"] = true;
        if (f.clamped > 0) row["clamped"] = f.clamped;
        arr.push_back(row);
    }
    return arr;
}

inline json empirical_block(const std::vector<TdcEstimate>& estimates) {
    json arr = json::array();
    for (const auto& e : estimates) {
        json row;
        row["estimator"] = e.estimator_id;
        row["tail"] = e.tail == Tail::upper ? "upper" : "lower";
        row["value"] = sig6(e.value);
        row["raw"] = sig6(e.raw);
        row["k"] = e.k_used;
        arr.push_back(row);
    }
    return arr;
}

inline json tdc_block(const TdcPair& t) {
    json b;
    b["lambda_lower"] = sig6(t.lower);
    b["lambda_upper"] = sig6(t.upper);
    return b;
}

inline json distance_block(const DistancePair& d) {
    json b;
    b["wasserstein"] = sig6(d.wasserstein);
    b["l2_star"] = sig6(d.l2_star);
    return b;
}

inline json method2_block(const Method2Result& r) {
    json b;
    b["reps"] = r.reps;
    b["counts"] = r.counts;
    json est = json::array();
    for (int k = 0; k < 5; ++k) {
        json up, lo;
        up["estimator"] = k + 1;
        up["tail"] = "upper";
        up["mean"] = sig6(r.mean_upper[k]);
        up["sd"] = sig6(r.sd_upper[k]);
        lo["estimator"] = k + 1;
        lo["tail"] = "lower";
        lo["mean"] = sig6(r.mean_lower[k]);
        lo["sd"] = sig6(r.sd_lower[k]);
        est.push_back(up);
        est.push_back(lo);
    }
    b["estimates"] = est;
    if (r.distances) b["distances"] = {{"bma", distance_block(*r.distances)}};
    if (r.distances_mean) b["distances"]["bma_mean"] = distance_block(*r.distances_mean);
    return b;
}

inline json mixture_entry(const PermutationEntry& e, double weight) {
    json row;
    json fams = json::array();
    for (auto [fam, rot] : e.families) {
        json f;
        f["model"] = family_name(fam);
        f["rotated"] = rot;
        fams.push_back(f);
    }
    row["families"] = fams;
    if (e.model.failed) {
        row["failed"] = true;
        row["error"] = e.model.failure;
        return row;
    }
    json comps = json::array();
    for (std::size_t k = 0; k < e.model.g; ++k) {
        const auto& c = e.model.components[k];
        json cj;
        cj["model"] = family_name(c.copula.family);
        cj["rotated"] = c.copula.rotated180;
        cj["theta"] = sig6(c.copula.theta);
        if (c.copula.df) cj["df"] = sig6(*c.copula.df);
        cj["mixing"] = sig6(e.model.mixing[k]);
        json m1, m2;
        for (double b : c.margin1.coefficients) m1.push_back(sig6(b));
        for (double b : c.margin2.coefficients) m2.push_back(sig6(b));
        cj["margin1"] = {{"coefficients", m1}, {"shape", sig6(c.margin1.shape)}};
        cj["margin2"] = {{"coefficients", m2}, {"shape", sig6(c.margin2.shape)}};
        comps.push_back(cj);
    }
    row["components"] = comps;
    row["loglik"] = sig6(e.model.loglik);
    row["n_params"] = e.model.n_params;
    row["aic"] = sig6(e.model.aic);
    row["bic"] = sig6(e.model.bic);
    row["weight"] = sig6(weight < 1e-6 ? 0.0 : weight);
    TdcPair t = mixture_tdc(e.model);
    row["lambda_lower"] = sig6(t.lower);
    row["lambda_upper"] = sig6(t.upper);
    row["converged"] = e.model.converged;
    row["iterations"] = e.model.iterations;
    return row;
}

inline void render_report(const json& rep, std::ostream& out) {
    out << rep.dump(2) << '\n';
}

inline void render_report(const json& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    render_report(rep, out);
    if (!out) throw DataError("write failed: " + path);
}

inline json load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open report: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError(std::string("invalid report JSON: ") + e.what());
    }
    return j;
}

// Reconstruct ensemble members from a rendered fit table.
inline Family family_from_name(const std::string& name) {
    for (Family f : {Family::joe, Family::gumbel, Family::clayton, Family::frank,
                     Family::gaussian, Family::student_t})
        if (name == family_name(f)) return f;
    throw DataError("unknown copula family: " + name);
}

inline std::vector<FitRecord> fits_from_block(const json& arr) {
    std::vector<FitRecord> fits;
    for (const auto& row : arr) {
        FitRecord f;
        f.spec.family = family_from_name(row.at("model").get<std::string>());
        f.spec.rotated180 = row.value("rotated", false);
        f.spec.theta = row.at("theta").get<double>();
        if (row.contains("df")) f.spec.df = row.at("df").get<double>();
        f.loglik = row.at("loglik").get<double>();
        f.n_params = row.at("n_params").get<int>();
        f.n_obs = row.at("n_obs").get<std::size_t>();
        f.aic = row.at("aic").get<double>();
        f.bic = row.at("bic").get<double>();
        f.converged = row.value("converged", true);
        f.tdc_pair = tdc(f.spec);
        fits.push_back(f);
    }
    return fits;
}

} // namespace tailblend::report
