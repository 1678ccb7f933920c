#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "variation.hpp"

namespace pace {

struct StratumEstimate {
    std::vector<double> z;                    // values of the Z columns
    double probability = 0.0;                 // empirical P(z)
    std::vector<double> px;                   // empirical P(x_i | z)
    std::vector<std::optional<double>> mean;  // empirical E(Y | x_i, z); empty cell = unavailable
};

struct ConditionalEstimates {
    std::vector<double> x_values;  // declared support of X if given, else distinct observed values; ascending
    std::vector<std::string> z_names;
    std::vector<StratumEstimate> strata;  // ascending by z
};

namespace detail {

struct Cell {
    double w = 0.0;
    double wy = 0.0;
};

inline std::vector<double> distinct_values(const Dataset& ds, std::size_t col) {
    std::map<double, bool> seen;
    for (std::size_t r = 0; r < ds.size(); ++r)
        if (ds.weight(r) > 0.0) seen[ds.value(r, col)] = true;
    std::vector<double> out;
    for (const auto& [v, _] : seen) out.push_back(v);
    return out;
}

inline std::vector<double> key(const Dataset& ds, std::size_t row, const std::vector<std::size_t>& cols) {
    std::vector<double> k;
    for (auto c : cols) k.push_back(ds.value(row, c));
    return k;
}

/// Values of X the chain runs over: the declared support when given, else the observed values.
inline std::vector<double> cause_values(const Dataset& ds, std::size_t col, const std::vector<double>& x_support) {
    auto seen = distinct_values(ds, col);
    if (x_support.empty()) return seen;
    if (!std::is_sorted(x_support.begin(), x_support.end())) throw QueryError("declared support of X must be ascending");
    for (double v : seen)
        if (!std::binary_search(x_support.begin(), x_support.end(), v))
            throw QueryError("observed value " + format_number(v) + " of '" + ds.columns()[col] + "' is outside the declared support");
    return x_support;
}

inline std::vector<std::size_t> resolve(const Dataset& ds, const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const auto& n : names) out.push_back(ds.column(n));
    return out;
}

} // namespace detail

/// Empirical P(z), P(x | z) and E(Y | x, z) per observed stratum z. `x_support` optionally lists
/// the declared values of X so that never-observed values keep their place in the chain.
inline ConditionalEstimates estimate_conditionals(const Dataset& ds, const std::string& x, const std::string& y,
                                                  const std::vector<std::string>& zs,
                                                  const std::vector<double>& x_support = {}) {
    std::size_t xc = ds.column(x), yc = ds.column(y);
    auto zc = detail::resolve(ds, zs);
    ConditionalEstimates out;
    out.x_values = detail::cause_values(ds, xc, x_support);
    out.z_names = zs;
    std::map<std::vector<double>, std::map<double, detail::Cell>> cells;
    double total = 0.0;
    for (std::size_t r = 0; r < ds.size(); ++r) {
        double w = ds.weight(r);
        if (!(w > 0.0)) continue;
        auto& c = cells[detail::key(ds, r, zc)][ds.value(r, xc)];
        c.w += w;
        c.wy += w * ds.value(r, yc);
        total += w;
    }
    for (const auto& [z, row] : cells) {
        StratumEstimate s;
        s.z = z;
        double wz = 0.0;
        for (const auto& [_, c] : row) wz += c.w;
        s.probability = wz / total;
        for (double xv : out.x_values) {
            auto it = row.find(xv);
            if (it == row.end()) {
                s.px.push_back(0.0);
                s.mean.push_back(std::nullopt);
            } else {
                s.px.push_back(it->second.w / wz);
                s.mean.push_back(it->second.wy / it->second.w);
            }
        }
        out.strata.push_back(std::move(s));
    }
    return out;
}

/// Plug-in estimate of the variational effect: E_Z of the per-z variation of E(Y | x, z) under P(x | z) weights.
inline double identifiable_effect(const Dataset& ds, const std::string& x, const std::string& y,
                                  const std::vector<std::string>& zs, double d, Variant v, Sign s = Sign::absolute,
                                  const std::vector<double>& x_support = {}) {
    if (d < 0.0) throw QueryError("degree must be non-negative");
    auto est = estimate_conditionals(ds, x, y, zs, x_support);
    double total = 0.0;
    for (const auto& st : est.strata) {
        // Empty cells have P(x | z) = 0 and therefore zero weight.
        std::vector<double> g;
        for (const auto& m : st.mean) g.push_back(m.value_or(0.0));
        total += st.probability * variation(v, g, st.px, d, s).value;
    }
    return total;
}

/// Natural availability of changing X estimated from data (identity outcome).
inline double natural_availability_estimate(const Dataset& ds, const std::string& x, const std::vector<std::string>& zs,
                                            double d, Variant v, const std::vector<double>& x_support = {}) {
    return identifiable_effect(ds, x, x, zs, d, v, Sign::absolute, x_support);
}

/// Covariate-adjusted plug-in: weights from sum_c P(x | z, c) P(c | z), outcome differences taken in the C = c0 cells.
inline double covariate_weighted_effect(const Dataset& ds, const std::string& x, const std::string& y,
                                        const std::vector<std::string>& zs, const std::string& c, double c0, double d,
                                        Variant v, Sign s = Sign::absolute, const std::vector<double>& x_support = {}) {
    if (d < 0.0) throw QueryError("degree must be non-negative");
    std::size_t xc = ds.column(x), yc = ds.column(y), cc = ds.column(c);
    auto zc = detail::resolve(ds, zs);
    auto xs = detail::cause_values(ds, xc, x_support);
    // z -> c -> x -> cell
    std::map<std::vector<double>, std::map<double, std::map<double, detail::Cell>>> cells;
    double total = 0.0;
    for (std::size_t r = 0; r < ds.size(); ++r) {
        double w = ds.weight(r);
        if (!(w > 0.0)) continue;
        auto& cell = cells[detail::key(ds, r, zc)][ds.value(r, cc)][ds.value(r, xc)];
        cell.w += w;
        cell.wy += w * ds.value(r, yc);
        total += w;
    }
    double out = 0.0;
    for (const auto& [z, by_c] : cells) {
        double wz = 0.0;
        std::map<double, double> wc;
        for (const auto& [cv, by_x] : by_c)
            for (const auto& [_, cell] : by_x) {
                wz += cell.w;
                wc[cv] += cell.w;
            }
        std::vector<double> q(xs.size(), 0.0);
        for (const auto& [cv, by_x] : by_c) {
            double pc = wc[cv] / wz;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                auto it = by_x.find(xs[i]);
                if (it != by_x.end()) q[i] += it->second.w / wc[cv] * pc;
            }
        }
        std::size_t positive = 0;
        for (double qi : q) positive += qi > 0.0;
        std::vector<double> g(xs.size(), 0.0);
        auto at_c0 = by_c.find(c0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!(q[i] > 0.0) || positive < 2) continue;
            const detail::Cell* cell = nullptr;
            if (at_c0 != by_c.end()) {
                auto it = at_c0->second.find(xs[i]);
                if (it != at_c0->second.end()) cell = &it->second;
            }
            if (!cell) {
                std::string zt;
                for (std::size_t k = 0; k < zs.size(); ++k) zt += ", " + zs[k] + "=" + format_number(z[k]);
                throw QueryError("no records with " + x + "=" + format_number(xs[i]) + zt + ", " + c + "=" + format_number(c0));
            }
            g[i] = cell->wy / cell->w;
        }
        out += wz / total * variation(v, g, q, d, s).value;
    }
    return out;
}

} // namespace pace
