#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace pace {

namespace detail {

/// Model over `vars` and `params` with each mechanism given by `f(name) -> Mechanism`.
template <class F>
Model rebuild(const std::vector<Variable>& vars, const std::vector<Parameter>& params, F&& f) {
    Model out;
    for (const auto& p : params) out.add_parameter(p);
    for (const auto& v : vars) out.add_variable(v);
    for (const auto& v : vars) out.set_mechanism(v.name, f(v.name));
    return out;
}

inline std::size_t row_in(const Model& m, const std::vector<std::string>& ps, const std::vector<std::string>& from,
                          const std::vector<std::size_t>& from_idx, const std::string& extra = {}, std::size_t extra_idx = 0) {
    std::size_t r = 0;
    for (const auto& p : ps) {
        std::size_t j;
        if (p == extra) {
            j = extra_idx;
        } else {
            auto pos = static_cast<std::size_t>(std::find(from.begin(), from.end(), p) - from.begin());
            j = from_idx[pos];
        }
        r = r * m.variable(p).support.size() + j;
    }
    return r;
}

} // namespace detail

/// Substitute a deterministic mediator into its children and drop it.
/// Expression bodies are substituted symbolically; tables are re-tabulated.
inline Model eliminate_mediator(const Model& m, const std::string& mediator) {
    require_valid(m);
    std::size_t mi = m.index(mediator);
    const auto* md = std::get_if<DeterministicMechanism>(&m.mechanism(mi));
    if (!md) throw ModelError("mediator '" + mediator + "' is stochastic; only deterministic mediators can be eliminated");
    const auto& mps = md->parents;

    std::optional<Kernel> mk;
    auto mediator_value = [&](const std::vector<std::string>& ps, const std::vector<std::size_t>& idx) {
        if (!mk) {
            for (const auto& id : md->is_table() ? std::vector<std::string>{} : identifiers(md->expr()))
                if (m.parameter(id)) throw ModelError("mediator '" + mediator + "' depends on unbound parameter '" + id + "'");
            mk = node_kernel(m, mi);
        }
        return mk->forced[detail::row_in(m, mps, ps, idx)];
    };

    std::vector<Variable> vars;
    for (const auto& v : m.variables())
        if (v.name != mediator) vars.push_back(v);

    return detail::rebuild(vars, m.parameters(), [&](const std::string& name) -> Mechanism {
        const Mechanism& mech = m.mechanism(name);
        const auto& ps = mechanism_parents(mech);
        if (std::find(ps.begin(), ps.end(), mediator) == ps.end()) return mech;

        std::vector<std::string> nps;
        for (const auto& p : ps)
            if (p != mediator) nps.push_back(p);
        for (const auto& p : mps)
            if (std::find(nps.begin(), nps.end(), p) == nps.end()) nps.push_back(p);

        if (auto* d = std::get_if<DeterministicMechanism>(&mech); d && !d->is_table() && !md->is_table())
            return DeterministicMechanism{nps, substitute(d->expr(), {{mediator, md->expr()}})};

        std::size_t rows = row_count(m, nps);
        if (auto* c = std::get_if<CptMechanism>(&mech)) {
            CptMechanism out{nps, {}};
            for (std::size_t r = 0; r < rows; ++r) {
                auto idx = decode_row(m, nps, r);
                out.rows.push_back(c->rows[detail::row_in(m, ps, nps, idx, mediator, mediator_value(nps, idx))]);
            }
            return out;
        }
        const auto& d = std::get<DeterministicMechanism>(mech);
        std::vector<double> table;
        std::optional<Kernel> ck;
        if (!d.is_table()) {
            for (const auto& id : identifiers(d.expr()))
                if (m.parameter(id)) throw ModelError("child '" + name + "' depends on unbound parameter '" + id + "'");
            ck = node_kernel(m, m.index(name));
        }
        for (std::size_t r = 0; r < rows; ++r) {
            auto idx = decode_row(m, nps, r);
            std::size_t old = detail::row_in(m, ps, nps, idx, mediator, mediator_value(nps, idx));
            table.push_back(ck ? m.variable(name).support[ck->forced[old]] : d.table()[old]);
        }
        return DeterministicMechanism{nps, table};
    });
}

struct NoiseOptions {
    std::string noise_name;                    // default U_<node>
    std::optional<std::string> free_parameter; // deterministic rows get B(param) noise instead of uniform
};

/// Rewrite a binary-outcome table as a lookup over (parents, noise) with a binary noise table.
/// Row base b = (sum of parent support indices) mod 2; the node takes its upper value iff b xor noise = 1.
inline Model cpt_to_noise(const Model& m, const std::string& node, const NoiseOptions& opts = {}) {
    require_valid(m);
    std::size_t ni = m.index(node);
    const auto* c = std::get_if<CptMechanism>(&m.mechanism(ni));
    if (!c) throw ModelError("'" + node + "' is not a conditional table");
    const auto& sup = m.variable(ni).support;
    if (sup.size() != 2) throw ModelError("'" + node + "' has a non-binary outcome; only binary outcomes can be converted");

    std::string noise = opts.noise_name.empty() ? "U_" + node : opts.noise_name;
    if (opts.noise_name.empty())
        for (int k = 2; m.has_name(noise); ++k) noise = "U_" + node + "_" + std::to_string(k);
    if (m.has_name(noise)) throw ModelError("name '" + noise + "' is already taken");

    auto params = m.parameters();
    if (opts.free_parameter) {
        if (m.has_name(*opts.free_parameter) || *opts.free_parameter == noise)
            throw ModelError("name '" + *opts.free_parameter + "' is already taken");
        params.push_back({*opts.free_parameter, 0.0, 1.0});
    }

    const auto& ps = c->parents;
    std::size_t rows = c->rows.size();
    std::vector<std::vector<Expr>> noise_rows;
    std::vector<double> table(rows * 2);
    for (std::size_t r = 0; r < rows; ++r) {
        auto lo_p = constant_value(c->rows[r][0]);
        auto hi_p = constant_value(c->rows[r][1]);
        if (!lo_p || !hi_p) throw ModelError("'" + node + "' row " + describe_row(m, ps, r) + " is not numeric; bind first");
        auto idx = decode_row(m, ps, r);
        std::size_t b = 0;
        for (auto j : idx) b += j;
        b %= 2;
        bool fixed = *hi_p == 1.0 || *lo_p == 1.0;
        if (fixed) {
            double v = *hi_p == 1.0 ? sup[1] : sup[0];
            table[r * 2] = table[r * 2 + 1] = v;
            if (opts.free_parameter) {
                Expr p = Expr::ref(*opts.free_parameter);
                noise_rows.push_back({Expr::binary(Op::sub, Expr::literal(1.0), p), p});
            } else {
                noise_rows.push_back({Expr::literal(0.5), Expr::literal(0.5)});
            }
        } else {
            double p1 = b == 0 ? *hi_p : *lo_p;
            noise_rows.push_back({Expr::literal(1.0 - p1), Expr::literal(p1)});
            for (std::size_t v = 0; v < 2; ++v) table[r * 2 + v] = ((b ^ v) == 1) ? sup[1] : sup[0];
        }
    }

    std::vector<Variable> vars;
    for (const auto& v : m.variables()) {
        if (v.name == node) vars.push_back({noise, FiniteSupport{0.0, 1.0}});
        vars.push_back(v);
    }
    auto nps = ps;
    nps.push_back(noise);
    return detail::rebuild(vars, params, [&](const std::string& name) -> Mechanism {
        if (name == noise) {
            if (ps.empty()) return RootMechanism{noise_rows[0]};
            return CptMechanism{ps, noise_rows};
        }
        if (name == node) return DeterministicMechanism{nps, table};
        return m.mechanism(name);
    });
}

} // namespace pace
