#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "joint.hpp"
#include "model.hpp"

namespace pace {

/// Recomputes deterministic nodes of a full state under an action, holding every
/// stochastic node at its realized value.
class WorldPropagator {
public:
    using Action = std::vector<std::pair<std::size_t, std::uint32_t>>;

    explicit WorldPropagator(const Model& bound) : model_(&bound), order_(topological_order(bound)), kernels_(all_kernels(bound)) {}

    Action action(const Assignment& a) const {
        Action out;
        for (const auto& [name, value] : a) {
            std::size_t k = model_->index(name);
            auto j = model_->variable(k).support.index_of(value);
            if (!j) throw QueryError("value " + format_number(value) + " not in support of '" + name + "'");
            out.emplace_back(k, static_cast<std::uint32_t>(*j));
        }
        return out;
    }

    void propagate(std::vector<std::uint32_t>& state, const Action& act) const {
        for (std::size_t node : order_) {
            bool fixed = false;
            for (const auto& [k, j] : act) {
                if (k == node) {
                    state[node] = j;
                    fixed = true;
                }
            }
            if (fixed) continue;
            const Kernel& ker = kernels_[node];
            if (ker.deterministic()) state[node] = static_cast<std::uint32_t>(ker.forced[ker.row_of(state)]);
        }
    }

    bool stochastic(std::size_t node) const { return !kernels_[node].deterministic(); }

private:
    const Model* model_;
    std::vector<std::size_t> order_;
    std::vector<Kernel> kernels_;
};

/// Observed values, optionally observed while some variables were held fixed by `context`.
struct Evidence {
    Assignment observed;
    Assignment context;
};

namespace detail {

struct Posterior {
    std::vector<std::vector<std::uint32_t>> states;
    std::vector<double> weights;
};

/// Prior states (observational joint) consistent with the evidence, normalized.
inline Posterior consistent_states(const Model& m, const JointTable& jt, const WorldPropagator& wp, const Evidence& ev) {
    auto ctx = wp.action(ev.context);
    auto obs = wp.action(ev.observed);
    Posterior post;
    double total = 0.0;
    std::size_t n = m.size();
    std::vector<std::uint32_t> s(n);
    for (std::size_t e = 0; e < jt.entries(); ++e) {
        s.assign(jt.state(e), jt.state(e) + n);
        wp.propagate(s, ctx);
        bool ok = true;
        for (const auto& [k, j] : obs)
            if (s[k] != j) ok = false;
        if (!ok) continue;
        post.states.emplace_back(jt.state(e), jt.state(e) + n);
        post.weights.push_back(jt.probability_at(e));
        total += jt.probability_at(e);
    }
    if (!(total > 0.0)) throw ZeroProbabilityError("evidence has probability zero");
    for (auto& w : post.weights) w /= total;
    return post;
}

} // namespace detail

/// Posterior over the stochastic (root and table) nodes outside the context, in declaration order.
inline Distribution abduct(const Model& m, const Evidence& ev) {
    JointTable jt = build_joint(m);
    WorldPropagator wp(m);
    auto post = detail::consistent_states(m, jt, wp, ev);
    std::vector<std::size_t> latent;
    std::vector<Variable> vars;
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (wp.stochastic(k) && !ev.context.count(m.variable(k).name)) {
            latent.push_back(k);
            vars.push_back(m.variable(k));
        }
    }
    std::size_t size = 1;
    for (const auto& v : vars) size *= v.support.size();
    std::vector<double> p(size, 0.0);
    for (std::size_t i = 0; i < post.states.size(); ++i) {
        std::size_t flat = 0;
        for (std::size_t q = 0; q < latent.size(); ++q)
            flat = flat * vars[q].support.size() + post.states[i][latent[q]];
        p[flat] += post.weights[i];
    }
    return Distribution(std::move(vars), std::move(p));
}

/// Distribution of `target` in the world where the context is overridden by `intervention`,
/// with the latent configuration drawn from the abducted posterior.
inline Distribution counterfactual_query(const Model& m, const Evidence& ev, const Assignment& intervention,
                                         const std::string& target) {
    std::size_t t = m.index(target);
    JointTable jt = build_joint(m);
    WorldPropagator wp(m);
    auto post = detail::consistent_states(m, jt, wp, ev);
    Assignment world = ev.context;
    for (const auto& [k, v] : intervention) world[k] = v;
    auto act = wp.action(world);
    std::vector<double> p(m.variable(t).support.size(), 0.0);
    for (std::size_t i = 0; i < post.states.size(); ++i) {
        auto s = post.states[i];
        wp.propagate(s, act);
        p[s[t]] += post.weights[i];
    }
    return Distribution({m.variable(t)}, std::move(p));
}

} // namespace pace
