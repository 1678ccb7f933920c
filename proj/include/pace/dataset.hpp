#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "joint.hpp"
#include "model.hpp"

namespace pace {

/// Rectangular table of records with non-negative row weights (1 for observed data).
class Dataset {
public:
    Dataset(std::vector<std::string> columns, std::vector<double> values, std::vector<double> weights = {})
        : columns_(std::move(columns)), values_(std::move(values)), weights_(std::move(weights)) {
        if (columns_.empty()) throw QueryError("dataset has no columns");
        if (values_.size() % columns_.size() != 0) throw QueryError("dataset is not rectangular");
        std::size_t n = values_.size() / columns_.size();
        if (n == 0) throw QueryError("dataset has no records");
        if (weights_.empty()) weights_.assign(n, 1.0);
        if (weights_.size() != n) throw QueryError("dataset weights do not match the number of records");
        for (std::size_t i = 0; i < columns_.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (columns_[i] == columns_[j]) throw QueryError("duplicate column '" + columns_[i] + "'");
    }

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    std::size_t size() const noexcept { return weights_.size(); }
    double value(std::size_t row, std::size_t col) const { return values_[row * columns_.size() + col]; }
    double weight(std::size_t row) const { return weights_[row]; }

    std::size_t column(const std::string& name) const {
        for (std::size_t k = 0; k < columns_.size(); ++k)
            if (columns_[k] == name) return k;
        throw QueryError("unknown column '" + name + "'");
    }

    double total_weight() const {
        double s = 0.0;
        for (double w : weights_) s += w;
        return s;
    }

    /// Throws QueryError if a named column holds a value outside the model's support.
    void check_supports(const Model& m) const {
        for (std::size_t k = 0; k < columns_.size(); ++k) {
            auto v = m.find(columns_[k]);
            if (!v) continue;
            const auto& sup = m.variable(*v).support;
            for (std::size_t r = 0; r < size(); ++r)
                if (!sup.contains(value(r, k)))
                    throw QueryError("record " + std::to_string(r + 1) + ": value " + format_number(value(r, k)) +
                                     " not in support of '" + columns_[k] + "'");
        }
    }

    /// Population limit: one record per joint state, weighted by its probability.
    static Dataset from_joint(const JointTable& jt) {
        std::vector<std::string> cols;
        for (const auto& v : jt.variables()) cols.push_back(v.name);
        std::vector<double> vals, w;
        for (std::size_t e = 0; e < jt.entries(); ++e) {
            for (std::size_t k = 0; k < cols.size(); ++k) vals.push_back(jt.variables()[k].support[jt.value_index(e, k)]);
            w.push_back(jt.probability_at(e));
        }
        return Dataset(std::move(cols), std::move(vals), std::move(w));
    }

private:
    std::vector<std::string> columns_;
    std::vector<double> values_;
    std::vector<double> weights_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

} // namespace detail

/// Header row of names, then one record per line. Blank lines are skipped.
inline Dataset read_csv(std::istream& in) {
    std::string line;
    std::vector<std::string> cols;
    std::size_t lineno = 0;
    while (cols.empty() && std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        cols = detail::split_csv(line);
    }
    if (cols.empty()) throw ParseError(1, 1, "empty dataset");
    std::vector<double> vals;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv(line);
        if (cells.size() != cols.size())
            throw ParseError(lineno, 1, "expected " + std::to_string(cols.size()) + " values, got " + std::to_string(cells.size()));
        for (const auto& c : cells) {
            double v = 0.0;
            auto res = std::from_chars(c.data(), c.data() + c.size(), v);
            if (c.empty() || res.ec != std::errc() || res.ptr != c.data() + c.size())
                throw ParseError(lineno, 1, "'" + c + "' is not a number");
            vals.push_back(v);
        }
    }
    if (vals.empty()) throw ParseError(lineno, 1, "dataset has no records");
    return Dataset(std::move(cols), std::move(vals));
}

inline Dataset read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
    return read_csv(in);
}

inline void write_csv(std::ostream& out, const Dataset& ds) {
    for (std::size_t k = 0; k < ds.columns().size(); ++k) out << (k ? "," : "") << ds.columns()[k];
    out << '\n';
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t k = 0; k < ds.columns().size(); ++k) out << (k ? "," : "") << format_number(ds.value(r, k));
        out << '\n';
    }
}

/// n independent draws from the joint, reproducible for a fixed seed.
inline Dataset sample(const JointTable& jt, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw QueryError("sample size must be positive");
    std::vector<double> w(jt.entries());
    for (std::size_t e = 0; e < jt.entries(); ++e) w[e] = jt.probability_at(e);
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    std::vector<std::string> cols;
    for (const auto& v : jt.variables()) cols.push_back(v.name);
    std::vector<double> vals;
    vals.reserve(n * cols.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t e = pick(rng);
        for (std::size_t k = 0; k < cols.size(); ++k) vals.push_back(jt.variables()[k].support[jt.value_index(e, k)]);
    }
    return Dataset(std::move(cols), std::move(vals));
}

} // namespace pace
