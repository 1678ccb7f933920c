#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "counterfactual.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "info.hpp"
#include "joint.hpp"
#include "model.hpp"
#include "transforms.hpp"

namespace pace {

using Arrow = std::pair<std::string, std::string>;
using ArrowSet = std::vector<Arrow>;

/// E(Y | do(X = x1)) - E(Y | do(X = x0)).
inline double ace(const Model& m, const std::string& x, double x0, double x1, const std::string& y) {
    return interventional_mean(m, {{x, x1}}, y) - interventional_mean(m, {{x, x0}}, y);
}

/// ACE restricted to a covariate event, conditioned on in each intervened model.
inline double cace(const Model& m, const std::string& x, double x0, double x1, const std::string& y,
                   const Assignment& covariates) {
    return interventional_mean(m, {{x, x1}}, y, covariates) - interventional_mean(m, {{x, x0}}, y, covariates);
}

/// Controlled direct effect averaged over the observational distribution of the controlled set.
inline double acde(const Model& m, const std::string& x, double x0, double x1, const std::string& y,
                   const std::vector<std::string>& controlled) {
    m.index(x);
    m.index(y);
    for (const auto& c : controlled) {
        m.index(c);
        if (c == x || c == y) throw QueryError("controlled set must not contain the cause or the outcome");
    }
    if (controlled.empty()) return ace(m, x, x0, x1, y);
    Distribution pm = build_joint(m).marginal(controlled);
    double out = 0.0;
    for (std::size_t k = 0; k < pm.size(); ++k) {
        if (!(pm[k] > 0.0)) continue;
        Assignment a1 = pm.assignment(k), a0 = a1;
        a1[x] = x1;
        a0[x] = x0;
        out += pm[k] * (interventional_mean(m, a1, y) - interventional_mean(m, a0, y));
    }
    return out;
}

/// Natural direct effect by enumeration of latent configurations: mediators take the values they
/// would have under X = x0. Table mediators are first rewritten with explicit noise. Y enters through
/// E(Y | parents) in each world, so Y itself may stay stochastic.
inline double ande(const Model& m, const std::string& x, double x0, double x1, const std::string& y,
                   const std::vector<std::string>& mediators) {
    m.index(x);
    m.index(y);
    Model f = m;
    for (const auto& med : mediators) {
        if (med == x || med == y) throw QueryError("'" + med + "' cannot be a mediator");
        if (std::holds_alternative<CptMechanism>(f.mechanism(med))) {
            try {
                f = cpt_to_noise(f, med);
            } catch (const ModelError& e) {
                throw ModelError("'" + med + "' is stochastic and cannot be made functional: " + e.what());
            }
        }
    }
    std::size_t n = f.size(), xi = f.index(x), yi = f.index(y);
    auto ks = all_kernels(f);
    auto order = topological_order(f);
    // Nodes downstream of X that feed Y or a mediator must be functions of their parents.
    std::vector<char> down(n, 0), up(n, 0);
    down[xi] = 1;
    for (auto v : order)
        for (auto p : ks[v].parents)
            if (down[p]) down[v] = 1;
    up[yi] = 1;
    for (const auto& med : mediators) up[f.index(med)] = 1;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if (up[*it])
            for (auto p : ks[*it].parents) up[p] = 1;
    for (std::size_t v = 0; v < n; ++v)
        if (v != xi && v != yi && down[v] && up[v] && !ks[v].deterministic())
            throw ModelError("'" + f.variable(v).name + "' is stochastic and depends on '" + x +
                             "'; the natural direct effect needs it written with exogenous noise");

    JointTable jt = build_joint(f);
    WorldPropagator wp(f);
    std::vector<std::size_t> mi;
    for (const auto& med : mediators) mi.push_back(f.index(med));
    auto base = wp.action({{x, x0}});
    auto treated = wp.action({{x, x1}});
    const auto& ky = ks[yi];
    const auto& ys = f.variable(yi).support;
    auto mean_y = [&](const std::vector<std::uint32_t>& state) {
        std::size_t row = ky.row_of(state);
        double e = 0.0;
        for (std::size_t j = 0; j < ky.width; ++j) e += ky.table[row * ky.width + j] * ys[j];
        return e;
    };
    double out = 0.0;
    for (std::size_t e = 0; e < jt.entries(); ++e) {
        std::vector<std::uint32_t> s0(jt.state(e), jt.state(e) + n);
        wp.propagate(s0, base);
        auto act0 = base, act1 = treated;
        for (auto k : mi) {
            act0.emplace_back(k, s0[k]);
            act1.emplace_back(k, s0[k]);
        }
        std::vector<std::uint32_t> a(jt.state(e), jt.state(e) + n), b = a;
        wp.propagate(a, act1);
        wp.propagate(b, act0);
        out += jt.probability_at(e) * (mean_y(a) - mean_y(b));
    }
    return out;
}

/// KL divergence between the joint and the joint with the given arrows cut, each cut
/// target fed with the product of its cut sources' marginals.
inline double janzing_strength(const Model& m, const ArrowSet& arrows, LogBase base = LogBase::bits) {
    std::map<std::size_t, std::vector<std::size_t>> cut;  // target -> cut source positions among its parents
    for (const auto& [src, dst] : arrows) {
        const auto& ps = m.parents(dst);
        auto it = std::find(ps.begin(), ps.end(), src);
        if (it == ps.end()) throw QueryError("no arrow " + src + " -> " + dst);
        auto pos = static_cast<std::size_t>(it - ps.begin());
        auto& v = cut[m.index(dst)];
        if (std::find(v.begin(), v.end(), pos) == v.end()) v.push_back(pos);
    }
    JointTable jt = build_joint(m);
    auto ks = all_kernels(m);

    struct Cut {
        std::size_t target;
        std::vector<std::size_t> positions;
        std::vector<std::vector<double>> marginals;  // per cut source
    };
    std::vector<Cut> cuts;
    for (const auto& [t, pos] : cut) {
        Cut c{t, pos, {}};
        for (auto q : pos) c.marginals.push_back(jt.marginal({m.parents(t)[q]}).probabilities());
        cuts.push_back(std::move(c));
    }

    double d = 0.0;
    for (std::size_t e = 0; e < jt.entries(); ++e) {
        const auto* s = jt.state(e);
        double log_ratio = 0.0;
        for (const auto& c : cuts) {
            const Kernel& k = ks[c.target];
            std::size_t xi = s[c.target];
            std::vector<std::size_t> pidx(k.parents.size());
            for (std::size_t q = 0; q < k.parents.size(); ++q) pidx[q] = s[k.parents[q]];
            double actual = k.table[k.row_of(s) * k.width + xi];
            // Sum over all joint values alpha of the cut sources.
            double cut_p = 0.0;
            std::vector<std::size_t> alpha(c.positions.size(), 0);
            for (;;) {
                double pa = 1.0;
                for (std::size_t a = 0; a < alpha.size(); ++a) {
                    pidx[c.positions[a]] = alpha[a];
                    pa *= c.marginals[a][alpha[a]];
                }
                if (pa > 0.0) {
                    std::size_t row = 0;
                    for (std::size_t q = 0; q < pidx.size(); ++q) row = row * k.radix[q] + pidx[q];
                    cut_p += pa * k.table[row * k.width + xi];
                }
                std::size_t a = 0;
                while (a < alpha.size() && ++alpha[a] == k.radix[c.positions[a]]) alpha[a++] = 0;
                if (a == alpha.size()) break;
            }
            log_ratio += log_in(actual / cut_p, base);
        }
        d += jt.probability_at(e) * log_ratio;
    }
    return d;
}

inline void require_parent(const Model& m, const std::string& x, const std::string& y) {
    const auto& ps = m.parents(y);
    if (std::find(ps.begin(), ps.end(), x) == ps.end()) throw QueryError("'" + x + "' is not a parent of '" + y + "'");
}

/// I(X;Y) for an arrow X -> Y.
inline double mi_strength(const Model& m, const std::string& x, const std::string& y) {
    require_parent(m, x, y);
    return mutual_information(build_joint(m), x, y);
}

/// I(X;Y | other parents of Y) for an arrow X -> Y.
inline double cmi_strength(const Model& m, const std::string& x, const std::string& y) {
    require_parent(m, x, y);
    std::vector<std::string> rest;
    for (const auto& p : m.parents(y))
        if (p != x) rest.push_back(p);
    return conditional_mutual_information(build_joint(m), x, y, rest);
}

/// Inverse probability weighting estimate of E(Y(s)), propensities from exact covariate strata.
inline double ipwe(const Dataset& ds, const std::string& treatment, double s, const std::string& outcome,
                   const std::vector<std::string>& covariates) {
    std::size_t tc = ds.column(treatment), yc = ds.column(outcome);
    std::vector<std::size_t> cc;
    for (const auto& c : covariates) cc.push_back(ds.column(c));
    struct Stratum {
        double w = 0.0;
        double treated = 0.0;
    };
    std::map<std::vector<double>, Stratum> strata;
    auto key = [&](std::size_t r) {
        std::vector<double> k;
        for (auto c : cc) k.push_back(ds.value(r, c));
        return k;
    };
    for (std::size_t r = 0; r < ds.size(); ++r) {
        auto& st = strata[key(r)];
        st.w += ds.weight(r);
        if (ds.value(r, tc) == s) st.treated += ds.weight(r);
    }
    for (const auto& [k, st] : strata) {
        if (st.w > 0.0 && !(st.treated > 0.0)) {
            std::string desc;
            for (std::size_t q = 0; q < covariates.size(); ++q) desc += (q ? ", " : "") + covariates[q] + "=" + format_number(k[q]);
            throw QueryError("positivity violation: no records with " + treatment + "=" + format_number(s) +
                             " in covariate stratum (" + desc + ")");
        }
    }
    double sum = 0.0;
    for (std::size_t r = 0; r < ds.size(); ++r) {
        if (ds.value(r, tc) != s) continue;
        const auto& st = strata[key(r)];
        sum += ds.weight(r) * ds.value(r, yc) / (st.treated / st.w);
    }
    return sum / ds.total_weight();
}

} // namespace pace
