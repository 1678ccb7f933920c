#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace pace {

/// Dense distribution over a list of variables, first variable most significant.
class Distribution {
public:
    Distribution() = default;
    Distribution(std::vector<Variable> vars, std::vector<double> probs) : vars_(std::move(vars)), probs_(std::move(probs)) {
        std::size_t n = 1;
        for (const auto& v : vars_) n *= v.support.size();
        if (n != probs_.size()) throw ModelError("distribution table has the wrong size");
    }

    const std::vector<Variable>& variables() const noexcept { return vars_; }
    const std::vector<double>& probabilities() const noexcept { return probs_; }
    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t flat) const { return probs_[flat]; }

    std::vector<std::size_t> decode(std::size_t flat) const {
        std::vector<std::size_t> idx(vars_.size());
        for (std::size_t k = vars_.size(); k-- > 0;) {
            idx[k] = flat % vars_[k].support.size();
            flat /= vars_[k].support.size();
        }
        return idx;
    }

    std::size_t encode(const std::vector<std::size_t>& idx) const {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < vars_.size(); ++k) flat = flat * vars_[k].support.size() + idx[k];
        return flat;
    }

    /// Assignment of values for a flat index.
    Assignment assignment(std::size_t flat) const {
        auto idx = decode(flat);
        Assignment a;
        for (std::size_t k = 0; k < vars_.size(); ++k) a[vars_[k].name] = vars_[k].support[idx[k]];
        return a;
    }

    /// Probability of a full assignment by values.
    double probability(const Assignment& a) const {
        std::vector<std::size_t> idx(vars_.size());
        for (std::size_t k = 0; k < vars_.size(); ++k) {
            auto it = a.find(vars_[k].name);
            if (it == a.end()) throw QueryError("assignment misses variable '" + vars_[k].name + "'");
            auto j = vars_[k].support.index_of(it->second);
            if (!j) return 0.0;
            idx[k] = *j;
        }
        return probs_[encode(idx)];
    }

    /// P(single variable = value) for a one-variable distribution.
    double probability(double value) const {
        if (vars_.size() != 1) throw QueryError("distribution is not univariate");
        auto j = vars_[0].support.index_of(value);
        return j ? probs_[*j] : 0.0;
    }

    double total() const { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

    /// E[value] for a one-variable distribution.
    double mean() const {
        if (vars_.size() != 1) throw QueryError("distribution is not univariate");
        double s = 0.0;
        for (std::size_t j = 0; j < probs_.size(); ++j) s += vars_[0].support[j] * probs_[j];
        return s;
    }

private:
    std::vector<Variable> vars_;
    std::vector<double> probs_;
};

struct JointOptions {
    double state_limit = 1e7;
};

/// Reads VCE_STATE_LIMIT, falling back to the default guard.
inline JointOptions joint_options_from_env() {
    JointOptions o;
    if (const char* s = std::getenv("VCE_STATE_LIMIT")) {
        char* end = nullptr;
        double v = std::strtod(s, &end);
        if (end != s && v > 0) o.state_limit = v;
    }
    return o;
}

/// Sparse exact joint distribution of a bound model (entries with positive mass only).
class JointTable {
public:
    JointTable() = default;

    const std::vector<Variable>& variables() const noexcept { return vars_; }
    std::size_t entries() const noexcept { return probs_.size(); }
    double probability_at(std::size_t e) const { return probs_[e]; }
    std::size_t value_index(std::size_t e, std::size_t var) const { return states_[e * vars_.size() + var]; }
    const std::uint32_t* state(std::size_t e) const { return &states_[e * vars_.size()]; }

    std::size_t index(const std::string& name) const {
        for (std::size_t k = 0; k < vars_.size(); ++k)
            if (vars_[k].name == name) return k;
        throw QueryError("unknown variable '" + name + "'");
    }

    double total() const { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

    /// P(event) where event fixes some variables by value.
    double probability(const Assignment& event) const {
        auto ev = resolve(event);
        if (!ev.ok) return 0.0;
        double s = 0.0;
        for (std::size_t e = 0; e < probs_.size(); ++e)
            if (matches(e, ev)) s += probs_[e];
        return s;
    }

    Distribution marginal(const std::vector<std::string>& names) const {
        std::vector<std::size_t> ids;
        for (const auto& n : names) ids.push_back(index(n));
        return marginal_ids(ids, {});
    }

    /// P(targets | given). Throws ZeroProbabilityError when P(given) = 0.
    Distribution conditional(const std::vector<std::string>& targets, const Assignment& given) const {
        std::vector<std::size_t> ids;
        for (const auto& n : targets) ids.push_back(index(n));
        auto ev = resolve(given);
        if (!ev.ok) throw ZeroProbabilityError("conditioning event " + describe(given) + " has probability zero");
        Distribution d = marginal_ids(ids, ev);
        double z = d.total();
        if (!(z > 0.0)) throw ZeroProbabilityError("conditioning event " + describe(given) + " has probability zero");
        std::vector<double> p = d.probabilities();
        for (auto& x : p) x /= z;
        return Distribution(d.variables(), std::move(p));
    }

    double expectation(const std::string& target, const Assignment& given = {}) const {
        return conditional({target}, given).mean();
    }

    static std::string describe(const Assignment& a) {
        std::string s = "{";
        bool first = true;
        for (const auto& [k, v] : a) {
            s += (first ? "" : ", ") + k + "=" + format_number(v);
            first = false;
        }
        return s + "}";
    }

private:
    struct Event {
        std::vector<std::pair<std::size_t, std::size_t>> fixed;
        bool ok = true;
    };

    Event resolve(const Assignment& a) const {
        Event ev;
        for (const auto& [name, value] : a) {
            std::size_t k = index(name);
            auto j = vars_[k].support.index_of(value);
            if (!j) throw QueryError("value " + format_number(value) + " not in support of '" + name + "'");
            ev.fixed.emplace_back(k, *j);
        }
        return ev;
    }

    bool matches(std::size_t e, const Event& ev) const {
        for (const auto& [k, j] : ev.fixed)
            if (value_index(e, k) != j) return false;
        return true;
    }

    Distribution marginal_ids(const std::vector<std::size_t>& ids, const Event& ev) const {
        std::vector<Variable> vs;
        std::size_t n = 1;
        for (auto k : ids) {
            vs.push_back(vars_[k]);
            n *= vars_[k].support.size();
        }
        std::vector<double> p(n, 0.0);
        for (std::size_t e = 0; e < probs_.size(); ++e) {
            if (!matches(e, ev)) continue;
            std::size_t flat = 0;
            for (auto k : ids) flat = flat * vars_[k].support.size() + value_index(e, k);
            p[flat] += probs_[e];
        }
        return Distribution(std::move(vs), std::move(p));
    }

    friend JointTable build_joint(const Model&, const JointOptions&);

    std::vector<Variable> vars_;
    std::vector<std::uint32_t> states_;
    std::vector<double> probs_;
};

/// Enumerate the product of node conditionals in topological order, pruning zero-mass branches.
inline JointTable build_joint(const Model& m, const JointOptions& opts = {}) {
    if (!m.parameters().empty()) throw ModelError("model has unbound parameters");
    double space = state_space_size(m);
    if (space > opts.state_limit)
        throw ModelError("state space of " + format_number(space) + " joint states exceeds the limit of " +
                         format_number(opts.state_limit));
    auto order = topological_order(m);
    auto ks = all_kernels(m);
    JointTable jt;
    jt.vars_ = m.variables();
    std::size_t n = m.size();
    std::vector<std::uint32_t> cur(n, 0);
    auto rec = [&](auto&& self, std::size_t depth, double mass) -> void {
        if (depth == n) {
            jt.states_.insert(jt.states_.end(), cur.begin(), cur.end());
            jt.probs_.push_back(mass);
            return;
        }
        std::size_t node = order[depth];
        const Kernel& k = ks[node];
        std::size_t row = k.row_of(cur);
        if (k.deterministic()) {
            cur[node] = static_cast<std::uint32_t>(k.forced[row]);
            self(self, depth + 1, mass);
            return;
        }
        for (std::size_t j = 0; j < k.width; ++j) {
            double p = k.table[row * k.width + j];
            if (p <= 0.0) continue;
            cur[node] = static_cast<std::uint32_t>(j);
            self(self, depth + 1, mass * p);
        }
    };
    rec(rec, 0, 1.0);
    double total = jt.total();
    if (std::fabs(total - 1.0) > 1e-9) throw ModelError("joint mass " + format_number(total) + " differs from 1");
    return jt;
}

/// Replace each intervened node's mechanism by a point-mass root.
inline Model intervene(const Model& m, const Assignment& action) {
    Model out = m;
    for (const auto& [name, value] : action) {
        const auto& v = m.variable(name);
        auto j = v.support.index_of(value);
        if (!j) throw QueryError("value " + format_number(value) + " not in support of '" + name + "'");
        std::vector<Expr> probs(v.support.size(), Expr::literal(0.0));
        probs[*j] = Expr::literal(1.0);
        out.set_mechanism(name, RootMechanism{std::move(probs)});
    }
    return out;
}

inline Distribution marginal(const JointTable& jt, const std::vector<std::string>& vars) { return jt.marginal(vars); }

inline Distribution conditional(const JointTable& jt, const std::vector<std::string>& targets, const Assignment& given) {
    return jt.conditional(targets, given);
}

inline double expectation(const JointTable& jt, const std::string& target, const Assignment& given = {}) {
    return jt.expectation(target, given);
}

inline double expectation(const Model& m, const std::string& target, const Assignment& given = {}) {
    return build_joint(m).expectation(target, given);
}

/// E(target | do(action)).
inline double interventional_mean(const Model& m, const Assignment& action, const std::string& target,
                                  const Assignment& given = {}) {
    return build_joint(intervene(m, action)).expectation(target, given);
}

} // namespace pace
