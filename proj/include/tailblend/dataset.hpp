#pragma once

// Bivariate loss dataset and delimited-text ingestion. Input files are
// comma-delimited UTF-8 with a header row and "." decimals; rows whose
// selected cells are missing or non-numeric are dropped and counted.

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tailblend/errors.hpp"

namespace tailblend {

struct Dataset {
    std::vector<double> y1, y2;
    std::vector<std::string> covariate_names;
    std::vector<std::vector<double>> covariates; // one column per name
    std::vector<int> labels;                     // empty when absent
    std::size_t rows_rejected = 0;

    std::size_t size() const { return y1.size(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::optional<double> parse_cell(std::string s) {
    // trim whitespace and a possible UTF-8 BOM / CR remnant
    auto issp = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

} // namespace detail

inline Dataset load_dataset(const std::string& path, const std::string& y1_col,
                            const std::string& y2_col,
                            const std::vector<std::string>& covariate_cols = {},
                            const std::string& label_col = "") {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    auto header = detail::split_csv_line(line);
    for (auto& h : header) {
        while (!h.empty() && (h.back() == '\r' || h.back() == ' ')) h.pop_back();
    }
    auto col_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw DataError("column not found: " + name);
    };

    std::size_t i1 = col_index(y1_col), i2 = col_index(y2_col);
    std::vector<std::size_t> icov;
    for (const auto& c : covariate_cols) icov.push_back(col_index(c));
    std::optional<std::size_t> ilab;
    if (!label_col.empty()) ilab = col_index(label_col);

    Dataset d;
    d.covariate_names = covariate_cols;
    d.covariates.resize(covariate_cols.size());
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        auto get = [&](std::size_t i) -> std::optional<double> {
            return i < cells.size() ? detail::parse_cell(cells[i]) : std::nullopt;
        };
        auto v1 = get(i1), v2 = get(i2);
        bool ok = v1 && v2;
        std::vector<double> cov(icov.size());
        for (std::size_t c = 0; ok && c < icov.size(); ++c) {
            auto v = get(icov[c]);
            if (!v) ok = false;
            else cov[c] = *v;
        }
        std::optional<double> lab;
        if (ok && ilab) {
            lab = get(*ilab);
            if (!lab) ok = false;
        }
        if (!ok) {
            ++d.rows_rejected;
            continue;
        }
        d.y1.push_back(*v1);
        d.y2.push_back(*v2);
        for (std::size_t c = 0; c < icov.size(); ++c) d.covariates[c].push_back(cov[c]);
        if (ilab) d.labels.push_back(static_cast<int>(*lab));
    }
    if (d.y1.empty()) throw DataError("no usable rows in " + path);
    return d;
}

inline void write_dataset_csv(const Dataset& d, std::ostream& out) {
    out << "y1,y2";
    for (const auto& n : d.covariate_names) out << ',' << n;
    if (!d.labels.empty()) out << ",label";
    out << '\n';
    char buf[64];
    auto put = [&](double v) {
        int n = std::snprintf(buf, sizeof buf, "%.12g", v);
        out.write(buf, n);
    };
    for (std::size_t i = 0; i < d.size(); ++i) {
        put(d.y1[i]);
        out << ',';
        put(d.y2[i]);
        for (const auto& col : d.covariates) {
            out << ',';
            put(col[i]);
        }
        if (!d.labels.empty()) out << ',' << d.labels[i];
        out << '\n';
    }
}

} // namespace tailblend
