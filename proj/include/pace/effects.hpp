#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "joint.hpp"
#include "model.hpp"
#include "variation.hpp"

namespace pace {

struct EffectQuery {
    std::string cause;
    std::string outcome;
    double degree = 1.0;
    Variant variant = Variant::pace;
    Sign sign = Sign::absolute;
};

/// Per-stratum entry of an effect report.
struct StratumValue {
    Assignment z;
    double probability = 0.0;
    double variation = 0.0;
    std::optional<Partition> witness;
};

struct EffectReport {
    EffectQuery query;
    double value = 0.0;
    std::vector<StratumValue> breakdown;
};

/// Outcome values and conditional cause probabilities for one stratum z with P(z) > 0.
struct Stratum {
    Assignment z;
    double probability = 0.0;
    std::vector<double> px;  // P(x_i | z)
    std::vector<double> g;   // outcome at (x_i, z)
};

/// Exact variational effects on one bound model; holds the joint table.
class EffectEngine {
public:
    explicit EffectEngine(Model bound, const JointOptions& opts = {}) : model_(std::move(bound)), joint_(build_joint(model_, opts)) {}

    const Model& model() const noexcept { return model_; }
    const JointTable& joint() const noexcept { return joint_; }

    /// Outcome value with every parent fixed.
    double g_in(const std::string& outcome, const Assignment& parents) const {
        std::size_t y = model_.index(outcome);
        const auto* d = std::get_if<DeterministicMechanism>(&model_.mechanism(y));
        if (!d) throw QueryError("outcome '" + outcome + "' is not deterministic");
        Kernel k = node_kernel(model_, y);
        std::size_t row = 0;
        for (std::size_t q = 0; q < d->parents.size(); ++q) {
            auto it = parents.find(d->parents[q]);
            if (it == parents.end()) throw QueryError("assignment misses parent '" + d->parents[q] + "'");
            auto j = model_.variable(d->parents[q]).support.index_of(it->second);
            if (!j)
                throw QueryError("value " + format_number(it->second) + " not in support of '" + d->parents[q] + "'");
            row = row * k.radix[q] + *j;
        }
        return model_.variable(y).support[k.forced[row]];
    }

    /// Z = parents(outcome) minus the cause, in the outcome's parent order.
    std::vector<std::string> others(const EffectQuery& q) const {
        check(q);
        std::vector<std::string> z;
        for (const auto& p : model_.parents(q.outcome))
            if (p != q.cause) z.push_back(p);
        return z;
    }

    std::vector<Stratum> strata(const EffectQuery& q) const {
        auto zs = others(q);
        std::size_t y = model_.index(q.outcome);
        Kernel k = node_kernel(model_, y);
        const auto& ps = model_.parents(y);
        auto names = zs;
        names.push_back(q.cause);
        Distribution d = joint_.marginal(names);
        const auto& xs = model_.variable(q.cause).support;
        std::size_t nx = xs.size();
        std::size_t nz = d.size() / nx;
        std::vector<Stratum> out;
        for (std::size_t zi = 0; zi < nz; ++zi) {
            double pz = 0.0;
            for (std::size_t x = 0; x < nx; ++x) pz += d[zi * nx + x];
            if (!(pz > 0.0)) continue;
            Stratum s;
            s.probability = pz;
            auto idx = d.decode(zi * nx);
            for (std::size_t k2 = 0; k2 < zs.size(); ++k2) s.z[zs[k2]] = d.variables()[k2].support[idx[k2]];
            std::vector<std::size_t> parent_idx(ps.size());
            for (std::size_t x = 0; x < nx; ++x) {
                s.px.push_back(d[zi * nx + x] / pz);
                for (std::size_t q2 = 0; q2 < ps.size(); ++q2) {
                    if (ps[q2] == q.cause) {
                        parent_idx[q2] = x;
                    } else {
                        auto pos = std::find(zs.begin(), zs.end(), ps[q2]) - zs.begin();
                        parent_idx[q2] = idx[static_cast<std::size_t>(pos)];
                    }
                }
                std::size_t row = 0;
                for (std::size_t q2 = 0; q2 < ps.size(); ++q2) row = row * k.radix[q2] + parent_idx[q2];
                s.g.push_back(model_.variable(y).support[k.forced[row]]);
            }
            out.push_back(std::move(s));
        }
        return out;
    }

    /// The stratum for a specific z; throws ZeroProbabilityError if P(z) = 0.
    Stratum stratum(const EffectQuery& q, const Assignment& z) const {
        auto zs = others(q);
        for (const auto& n : zs)
            if (!z.count(n)) throw QueryError("z assignment misses '" + n + "'");
        for (const auto& [n, v] : z) {
            if (std::find(zs.begin(), zs.end(), n) == zs.end()) throw QueryError("'" + n + "' is not in Z");
            if (!model_.variable(n).support.contains(v))
                throw QueryError("value " + format_number(v) + " not in support of '" + n + "'");
        }
        for (auto& s : strata(q))
            if (s.z == z) return s;
        throw ZeroProbabilityError("stratum " + JointTable::describe(z) + " has probability zero");
    }

    double piev(const EffectQuery& q, const Assignment& z, const Partition& part) const {
        auto s = stratum(q, z);
        check_partition(q, part);
        return easy_variation(s.g, s.px, q.degree, q.sign, part.indices);
    }

    double matrix_form_piev(const EffectQuery& q, const Assignment& z, const Partition& part, bool normalized = true) const {
        auto s = stratum(q, z);
        check_partition(q, part);
        return quadratic_form_variation(s.g, s.px, q.degree, q.sign, part.indices, normalized);
    }

    Chain piv(const EffectQuery& q, const Assignment& z) const {
        auto s = stratum(q, z);
        return chain_variation(s.g, s.px, q.degree, q.sign);
    }

    Chain brute_force_piv(const EffectQuery& q, const Assignment& z) const {
        auto s = stratum(q, z);
        return brute_force_chain_variation(s.g, s.px, q.degree, q.sign);
    }

    Chain spiv(const EffectQuery& q, const Assignment& z) const {
        auto s = stratum(q, z);
        return pair_variation(s.g, s.px, q.degree, q.sign);
    }

    double apiv(const EffectQuery& q, const Assignment& z) const {
        auto s = stratum(q, z);
        return aggregated_variation(s.g, s.px, q.degree, q.sign);
    }

    EffectReport effect(const EffectQuery& q) const {
        EffectReport r;
        r.query = q;
        for (auto& s : strata(q)) {
            Chain c = variation(q.variant, s.g, s.px, q.degree, q.sign);
            StratumValue b{s.z, s.probability, c.value, std::nullopt};
            if (!c.indices.empty()) b.witness = Partition{c.indices};
            r.value += s.probability * c.value;
            r.breakdown.push_back(std::move(b));
        }
        return r;
    }

    std::vector<double> pace_vector(EffectQuery q, const std::vector<double>& grid) const {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (grid[k] < 0.0) throw QueryError("degree must be non-negative");
            if (k > 0 && grid[k] < grid[k - 1]) throw QueryError("degree grid must be ascending");
        }
        std::vector<double> out;
        for (double d : grid) {
            q.degree = d;
            out.push_back(effect(q).value);
        }
        return out;
    }

    /// Variation of X with respect to itself, weighted by P(x | z), averaged over z.
    double natural_availability(const std::string& cause, const std::vector<std::string>& zs, double d, Variant v,
                                Sign s = Sign::absolute) const {
        if (d < 0.0) throw QueryError("degree must be non-negative");
        model_.index(cause);
        for (const auto& n : zs) {
            model_.index(n);
            if (n == cause) throw QueryError("the cause cannot be part of Z");
        }
        auto names = zs;
        names.push_back(cause);
        Distribution dist = joint_.marginal(names);
        const auto& xs = model_.variable(cause).support;
        std::size_t nx = xs.size();
        double total = 0.0;
        std::vector<double> px(nx);
        for (std::size_t zi = 0; zi < dist.size() / nx; ++zi) {
            double pz = 0.0;
            for (std::size_t x = 0; x < nx; ++x) pz += dist[zi * nx + x];
            if (!(pz > 0.0)) continue;
            for (std::size_t x = 0; x < nx; ++x) px[x] = dist[zi * nx + x] / pz;
            total += pz * variation(v, xs.values(), px, d, s).value;
        }
        return total;
    }

    /// Variation of interventional means E(Y | do(X = x)) weighted by marginal P(x); no Z averaging.
    double ace_flavored_effect(const std::string& cause, const std::string& outcome, double d, Variant v, Sign s) const {
        if (d < 0.0) throw QueryError("degree must be non-negative");
        model_.index(outcome);
        const auto& xs = model_.variable(cause).support;
        Distribution px = joint_.marginal({cause});
        std::vector<double> means;
        for (double x : xs) means.push_back(build_joint(intervene(model_, {{cause, x}})).expectation(outcome));
        return variation(v, means, px.probabilities(), d, s).value;
    }

private:
    void check(const EffectQuery& q) const {
        model_.index(q.cause);
        std::size_t y = model_.index(q.outcome);
        if (!std::holds_alternative<DeterministicMechanism>(model_.mechanism(y)))
            throw QueryError("outcome '" + q.outcome + "' must be deterministic");
        const auto& ps = model_.parents(y);
        if (std::find(ps.begin(), ps.end(), q.cause) == ps.end())
            throw QueryError("'" + q.cause + "' is not a parent of '" + q.outcome + "'");
        if (!(q.degree >= 0.0)) throw QueryError("degree must be non-negative");
    }

    void check_partition(const EffectQuery& q, const Partition& part) const {
        if (!part.valid_for(model_.variable(q.cause).support.size()))
            throw QueryError("partition must be an increasing list of at least two support indices");
    }

    Model model_;
    JointTable joint_;
};

inline double g_in(const Model& m, const std::string& outcome, const Assignment& parents) {
    return EffectEngine(m).g_in(outcome, parents);
}

inline double piev(const Model& m, const EffectQuery& q, const Assignment& z, const Partition& part) {
    return EffectEngine(m).piev(q, z, part);
}

inline Chain piv(const Model& m, const EffectQuery& q, const Assignment& z) { return EffectEngine(m).piv(q, z); }

inline Chain brute_force_piv(const Model& m, const EffectQuery& q, const Assignment& z) {
    return EffectEngine(m).brute_force_piv(q, z);
}

inline Chain spiv(const Model& m, const EffectQuery& q, const Assignment& z) { return EffectEngine(m).spiv(q, z); }

inline double apiv(const Model& m, const EffectQuery& q, const Assignment& z) { return EffectEngine(m).apiv(q, z); }

inline double matrix_form_piev(const Model& m, const EffectQuery& q, const Assignment& z, const Partition& part) {
    return EffectEngine(m).matrix_form_piev(q, z, part);
}

inline EffectReport effect(const Model& m, const EffectQuery& q) { return EffectEngine(m).effect(q); }

inline std::vector<double> pace_vector(const Model& m, const EffectQuery& q, const std::vector<double>& grid) {
    return EffectEngine(m).pace_vector(q, grid);
}

/// Evenly spaced degrees d_i = i * top / n for i = 0..n.
inline std::vector<double> degree_grid(std::size_t n, double top = 1.0) {
    std::vector<double> g;
    for (std::size_t i = 0; i <= n; ++i) g.push_back(n == 0 ? 0.0 : top * static_cast<double>(i) / static_cast<double>(n));
    return g;
}

inline double natural_availability(const Model& m, const std::string& cause, const std::vector<std::string>& zs,
                                   double d, Variant v, Sign s = Sign::absolute) {
    return EffectEngine(m).natural_availability(cause, zs, d, v, s);
}

inline double ace_flavored_effect(const Model& m, const std::string& cause, const std::string& outcome, double d,
                                  Variant v, Sign s = Sign::absolute) {
    return EffectEngine(m).ace_flavored_effect(cause, outcome, d, v, s);
}

} // namespace pace
