#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace pace {

enum class Variant { pace, peace, space, apace };
enum class Sign { absolute, positive, negative };

inline std::string to_string(Variant v) {
    switch (v) {
    case Variant::pace: return "pace";
    case Variant::peace: return "peace";
    case Variant::space: return "space";
    default: return "apace";
    }
}

inline std::string to_string(Sign s) {
    switch (s) {
    case Sign::absolute: return "abs";
    case Sign::positive: return "positive";
    default: return "negative";
    }
}

inline Variant parse_variant(const std::string& s) {
    if (s == "pace") return Variant::pace;
    if (s == "peace") return Variant::peace;
    if (s == "space") return Variant::space;
    if (s == "apace") return Variant::apace;
    throw QueryError("unknown variant '" + s + "' (expected pace, peace, space or apace)");
}

inline Sign parse_sign(const std::string& s) {
    if (s == "abs" || s == "absolute") return Sign::absolute;
    if (s == "positive" || s == "pos" || s == "+") return Sign::positive;
    if (s == "negative" || s == "neg" || s == "-") return Sign::negative;
    throw QueryError("unknown sign '" + s + "' (expected abs, positive or negative)");
}

/// Normalized pair weight (4pq)^d; zero whenever either probability is zero, also at d = 0.
inline double weight(double p, double q, double d) {
    if (p <= 0.0 || q <= 0.0) return 0.0;
    return std::pow(4.0 * p * q, d);
}

/// Change from g(x) = from to g(x') = to, x < x', under the requested sign.
inline double signed_change(double from, double to, Sign s) {
    double r = to - from;
    switch (s) {
    case Sign::absolute: return std::fabs(r);
    case Sign::positive: return r > 0.0 ? r : 0.0;
    default: return r < 0.0 ? -r : 0.0;
    }
}

/// A variation value with the support indices that attain it.
struct Chain {
    double value = 0.0;
    std::vector<std::size_t> indices;
};

constexpr double tie_tolerance = 1e-12;

/// Order on candidate witnesses: larger value, then fewer points, then lexicographically smaller.
inline bool preferred(const Chain& a, const Chain& b) {
    if (a.value > b.value + tie_tolerance) return true;
    if (b.value > a.value + tie_tolerance) return false;
    if (a.indices.size() != b.indices.size()) return a.indices.size() < b.indices.size();
    return a.indices < b.indices;
}

inline double pair_term(std::span<const double> g, std::span<const double> p, double d, Sign s, std::size_t i, std::size_t j) {
    double w = weight(p[i], p[j], d);
    return w == 0.0 ? 0.0 : signed_change(g[i], g[j], s) * w;
}

/// Sum of weighted changes between consecutive points of `indices`.
inline double easy_variation(std::span<const double> g, std::span<const double> p, double d, Sign s,
                             const std::vector<std::size_t>& indices) {
    double v = 0.0;
    for (std::size_t k = 1; k < indices.size(); ++k) v += pair_term(g, p, d, s, indices[k - 1], indices[k]);
    return v;
}

/// Maximum over all increasing index chains, by the O(n^2) chain recursion.
inline Chain chain_variation(std::span<const double> g, std::span<const double> p, double d, Sign s) {
    std::size_t n = g.size();
    if (n < 2) return {};
    std::vector<Chain> best(n);
    for (std::size_t j = 0; j < n; ++j) {
        best[j] = Chain{0.0, {j}};
        for (std::size_t i = 0; i < j; ++i) {
            Chain cand{best[i].value + pair_term(g, p, d, s, i, j), best[i].indices};
            cand.indices.push_back(j);
            if (preferred(cand, best[j])) best[j] = std::move(cand);
        }
    }
    Chain out{pair_term(g, p, d, s, 0, 1), {0, 1}};
    for (const auto& c : best)
        if (c.indices.size() >= 2 && preferred(c, out)) out = c;
    return out;
}

/// Exhaustive maximum over all 2^n - n - 1 chains; n <= 20.
inline Chain brute_force_chain_variation(std::span<const double> g, std::span<const double> p, double d, Sign s) {
    std::size_t n = g.size();
    if (n > 20) throw QueryError("brute force limited to supports of at most 20 values");
    if (n < 2) return {};
    Chain out{pair_term(g, p, d, s, 0, 1), {0, 1}};
    std::vector<std::size_t> idx;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) < 2) continue;
        idx.clear();
        for (std::size_t k = 0; k < n; ++k)
            if (mask & (1u << k)) idx.push_back(k);
        Chain c{easy_variation(g, p, d, s, idx), idx};
        if (preferred(c, out)) out = std::move(c);
    }
    return out;
}

/// Largest single-pair term.
inline Chain pair_variation(std::span<const double> g, std::span<const double> p, double d, Sign s) {
    std::size_t n = g.size();
    if (n < 2) return {};
    Chain out{pair_term(g, p, d, s, 0, 1), {0, 1}};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            Chain c{pair_term(g, p, d, s, i, j), {i, j}};
            if (preferred(c, out)) out = std::move(c);
        }
    return out;
}

/// Sum over all pairs i < j.
inline double aggregated_variation(std::span<const double> g, std::span<const double> p, double d, Sign s) {
    double v = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j) v += pair_term(g, p, d, s, i, j);
    return v;
}

inline std::vector<std::size_t> full_chain(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = k;
    return idx;
}

/// Per-variant variation. Witnesses are reported for pace and space only.
inline Chain variation(Variant v, std::span<const double> g, std::span<const double> p, double d, Sign s) {
    switch (v) {
    case Variant::pace: return chain_variation(g, p, d, s);
    case Variant::space: return pair_variation(g, p, d, s);
    case Variant::peace: {
        auto idx = full_chain(g.size());
        return {easy_variation(g, p, d, s, idx), {}};
    }
    default: return {aggregated_variation(g, p, d, s), {}};
    }
}

namespace detail {

inline Eigen::VectorXd powered(std::span<const double> p, double d) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(p.size()));
    for (std::size_t k = 0; k < p.size(); ++k) v[static_cast<Eigen::Index>(k)] = p[k] > 0.0 ? std::pow(p[k], d) : 0.0;
    return v;
}

} // namespace detail

/// v' A v with v = p^d and A the upper-triangular matrix of consecutive chain changes.
/// Multiplied by 4^d when normalized.
inline double quadratic_form_variation(std::span<const double> g, std::span<const double> p, double d, Sign s,
                                       const std::vector<std::size_t>& indices, bool normalized = true) {
    auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 1; k < indices.size(); ++k) {
        auto i = indices[k - 1], j = indices[k];
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = signed_change(g[i], g[j], s);
    }
    Eigen::VectorXd v = detail::powered(p, d);
    double q = v.dot(a * v);
    return normalized ? q * std::pow(4.0, d) : q;
}

/// Quadratic form with every pair i < j present (the aggregated variant).
inline double quadratic_form_aggregated(std::span<const double> g, std::span<const double> p, double d, Sign s,
                                        bool normalized = true) {
    auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            a(i, j) = signed_change(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)], s);
    Eigen::VectorXd v = detail::powered(p, d);
    double q = v.dot(a * v);
    return normalized ? q * std::pow(4.0, d) : q;
}

} // namespace pace
