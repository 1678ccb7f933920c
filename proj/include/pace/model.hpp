#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "support.hpp"

namespace pace {

struct Parameter {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;

    friend bool operator==(const Parameter&, const Parameter&) = default;
};

/// Marginal table, one probability expression per support value.
struct RootMechanism {
    std::vector<Expr> probs;

    friend bool operator==(const RootMechanism&, const RootMechanism&) = default;
};

/// Conditional table. Rows are indexed mixed-radix over the parents' support
/// indices, first parent most significant.
struct CptMechanism {
    std::vector<std::string> parents;
    std::vector<std::vector<Expr>> rows;

    friend bool operator==(const CptMechanism&, const CptMechanism&) = default;
};

/// Function of the parents, either an expression or a lookup table (row-indexed like CptMechanism).
struct DeterministicMechanism {
    std::vector<std::string> parents;
    std::variant<Expr, std::vector<double>> body;

    bool is_table() const { return std::holds_alternative<std::vector<double>>(body); }
    const Expr& expr() const { return std::get<Expr>(body); }
    const std::vector<double>& table() const { return std::get<std::vector<double>>(body); }

    friend bool operator==(const DeterministicMechanism&, const DeterministicMechanism&) = default;
};

using Mechanism = std::variant<std::monostate, RootMechanism, CptMechanism, DeterministicMechanism>;

inline const std::vector<std::string>& mechanism_parents(const Mechanism& m) {
    static const std::vector<std::string> none;
    if (auto* c = std::get_if<CptMechanism>(&m)) return c->parents;
    if (auto* d = std::get_if<DeterministicMechanism>(&m)) return d->parents;
    return none;
}

inline bool is_stochastic(const Mechanism& m) {
    return std::holds_alternative<RootMechanism>(m) || std::holds_alternative<CptMechanism>(m);
}

/// Acyclic structural model over finite-support variables.
class Model {
public:
    void add_parameter(Parameter p) {
        if (has_name(p.name)) throw ModelError("duplicate name '" + p.name + "'");
        params_.push_back(std::move(p));
    }

    void add_variable(Variable v) {
        if (has_name(v.name)) throw ModelError("duplicate name '" + v.name + "'");
        index_.emplace(v.name, vars_.size());
        vars_.push_back(std::move(v));
        mechs_.emplace_back();
    }

    void set_mechanism(const std::string& var, Mechanism m) { mechs_[index(var)] = std::move(m); }

    const std::vector<Variable>& variables() const noexcept { return vars_; }
    const std::vector<Parameter>& parameters() const noexcept { return params_; }
    const std::vector<Mechanism>& mechanisms() const noexcept { return mechs_; }
    std::size_t size() const noexcept { return vars_.size(); }

    const Variable& variable(std::size_t i) const { return vars_[i]; }
    const Variable& variable(const std::string& name) const { return vars_[index(name)]; }
    const Mechanism& mechanism(std::size_t i) const { return mechs_[i]; }
    const Mechanism& mechanism(const std::string& name) const { return mechs_[index(name)]; }
    const std::vector<std::string>& parents(std::size_t i) const { return mechanism_parents(mechs_[i]); }
    const std::vector<std::string>& parents(const std::string& name) const { return parents(index(name)); }

    std::optional<std::size_t> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t index(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw QueryError("unknown variable '" + name + "'");
        return it->second;
    }

    const Parameter* parameter(const std::string& name) const {
        for (const auto& p : params_)
            if (p.name == name) return &p;
        return nullptr;
    }

    bool has_name(const std::string& name) const { return index_.count(name) || parameter(name); }

    /// Children of a variable, in declaration order.
    std::vector<std::string> children(const std::string& name) const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            for (const auto& p : parents(i))
                if (p == name) out.push_back(vars_[i].name);
        return out;
    }

    friend bool operator==(const Model& a, const Model& b) {
        return a.vars_ == b.vars_ && a.params_ == b.params_ && a.mechs_ == b.mechs_;
    }

private:
    std::vector<Variable> vars_;
    std::vector<Parameter> params_;
    std::vector<Mechanism> mechs_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Number of rows of a table over the given parents.
inline std::size_t row_count(const Model& m, const std::vector<std::string>& parents) {
    std::size_t n = 1;
    for (const auto& p : parents) {
        auto i = m.find(p);
        n *= i ? m.variable(*i).support.size() : 0;
    }
    return n;
}

/// Decode a row index into per-parent support indices.
inline std::vector<std::size_t> decode_row(const Model& m, const std::vector<std::string>& parents, std::size_t row) {
    std::vector<std::size_t> idx(parents.size());
    for (std::size_t k = parents.size(); k-- > 0;) {
        std::size_t n = m.variable(parents[k]).support.size();
        idx[k] = row % n;
        row /= n;
    }
    return idx;
}

inline std::string describe_row(const Model& m, const std::vector<std::string>& parents, std::size_t row) {
    auto idx = decode_row(m, parents, row);
    std::string s = "(";
    for (std::size_t k = 0; k < parents.size(); ++k) {
        if (k) s += ", ";
        s += parents[k] + "=" + format_number(m.variable(parents[k]).support[idx[k]]);
    }
    return s + ")";
}

namespace detail {

inline bool is_param_only(const Model& m, const Expr& e, std::string& bad) {
    for (const auto& id : identifiers(e)) {
        if (!m.parameter(id)) {
            bad = id;
            return false;
        }
    }
    return true;
}

/// Finds one cycle as a list of names (first == last), or empty.
inline std::vector<std::string> find_cycle(const Model& m) {
    std::size_t n = m.size();
    std::vector<int> state(n, 0);
    std::vector<std::size_t> stack;
    std::vector<std::string> cycle;
    auto dfs = [&](auto&& self, std::size_t v) -> bool {
        state[v] = 1;
        stack.push_back(v);
        for (const auto& p : m.parents(v)) {
            auto u = m.find(p);
            if (!u) continue;
            if (state[*u] == 1) {
                auto it = std::find(stack.begin(), stack.end(), *u);
                for (; it != stack.end(); ++it) cycle.push_back(m.variable(*it).name);
                cycle.push_back(m.variable(*u).name);
                std::reverse(cycle.begin(), cycle.end());
                return true;
            }
            if (state[*u] == 0 && self(self, *u)) return true;
        }
        stack.pop_back();
        state[v] = 2;
        return false;
    };
    for (std::size_t v = 0; v < n; ++v)
        if (state[v] == 0 && dfs(dfs, v)) return cycle;
    return {};
}

} // namespace detail

/// Structural and numeric diagnostics; empty iff the model is valid.
/// Numeric probability checks are skipped for entries that reference parameters.
inline std::vector<std::string> validate(const Model& m) {
    std::vector<std::string> out;
    if (m.size() == 0) out.push_back("no variables declared");
    for (const auto& p : m.parameters())
        if (!(p.lower <= p.upper)) out.push_back("parameter '" + p.name + "' has lower bound above upper bound");

    bool parents_ok = true;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& v = m.variable(i);
        const auto& mech = m.mechanism(i);
        std::string where = "variable '" + v.name + "': ";
        if (std::holds_alternative<std::monostate>(mech)) {
            out.push_back(where + "missing mechanism");
            continue;
        }
        const auto& ps = mechanism_parents(mech);
        for (std::size_t k = 0; k < ps.size(); ++k) {
            if (!m.find(ps[k])) {
                out.push_back(where + "unknown parent '" + ps[k] + "'");
                parents_ok = false;
            }
            for (std::size_t j = 0; j < k; ++j)
                if (ps[j] == ps[k]) out.push_back(where + "duplicate parent '" + ps[k] + "'");
        }
        if (!parents_ok) continue;
        std::size_t width = v.support.size();
        std::size_t rows = row_count(m, ps);

        auto check_probs = [&](const std::vector<Expr>& probs, const std::string& ctx) {
            if (probs.size() != width) {
                out.push_back(where + ctx + "expected " + std::to_string(width) + " entries");
                return;
            }
            double sum = 0.0;
            bool numeric = true;
            for (const auto& e : probs) {
                std::string bad;
                if (!detail::is_param_only(m, e, bad)) {
                    out.push_back(where + ctx + "probability references non-parameter '" + bad + "'");
                    numeric = false;
                    continue;
                }
                if (!identifiers(e).empty()) {
                    numeric = false;
                    continue;
                }
                double p;
                try {
                    p = *constant_value(e);
                } catch (const EvalError& err) {
                    out.push_back(where + ctx + err.what());
                    numeric = false;
                    continue;
                }
                if (!(p >= -1e-12 && p <= 1 + 1e-12))
                    out.push_back(where + ctx + "probability " + format_number(p) + " outside [0,1]");
                sum += p;
            }
            if (numeric && std::fabs(sum - 1.0) > 1e-9)
                out.push_back(where + ctx + "probabilities sum to " + format_number(sum));
        };

        if (auto* r = std::get_if<RootMechanism>(&mech)) {
            check_probs(r->probs, "");
        } else if (auto* c = std::get_if<CptMechanism>(&mech)) {
            if (c->rows.size() != rows) {
                out.push_back(where + "expected " + std::to_string(rows) + " rows, got " + std::to_string(c->rows.size()));
            } else {
                for (std::size_t r = 0; r < rows; ++r) check_probs(c->rows[r], "row " + describe_row(m, ps, r) + ": ");
            }
        } else {
            const auto& d = std::get<DeterministicMechanism>(mech);
            if (d.is_table()) {
                const auto& t = d.table();
                if (t.size() != rows) {
                    out.push_back(where + "expected " + std::to_string(rows) + " table rows, got " + std::to_string(t.size()));
                } else {
                    for (std::size_t r = 0; r < rows; ++r)
                        if (!v.support.contains(t[r]))
                            out.push_back(where + "value " + format_number(t[r]) + " outside support at " + describe_row(m, ps, r));
                }
            } else {
                for (const auto& id : identifiers(d.expr())) {
                    if (std::find(ps.begin(), ps.end(), id) == ps.end() && !m.parameter(id))
                        out.push_back(where + "expression references '" + id + "' which is neither a parent nor a parameter");
                }
            }
        }
    }
    if (parents_ok) {
        auto cyc = detail::find_cycle(m);
        if (!cyc.empty()) {
            std::string s = "cycle detected: ";
            for (std::size_t k = 0; k < cyc.size(); ++k) s += (k ? " -> " : "") + cyc[k];
            out.push_back(s);
        }
    }
    return out;
}

inline void require_valid(const Model& m) {
    auto diags = validate(m);
    if (diags.empty()) return;
    std::string msg = diags.front();
    for (std::size_t k = 1; k < diags.size(); ++k) msg += "; " + diags[k];
    throw ModelError(msg);
}

/// Stable topological order: among ready nodes the earliest declared comes first.
inline std::vector<std::size_t> topological_order(const Model& m) {
    std::size_t n = m.size();
    std::vector<std::size_t> pending(n, 0);
    std::vector<std::vector<std::size_t>> kids(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& p : m.parents(i)) {
            std::size_t j = m.index(p);
            kids[j].push_back(i);
            ++pending[i];
        }
    }
    std::vector<std::size_t> order;
    std::vector<bool> done(n, false);
    while (order.size() < n) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!done[i] && pending[i] == 0) {
                pick = i;
                break;
            }
        }
        if (pick == n) {
            auto cyc = detail::find_cycle(m);
            std::string s = "cycle detected: ";
            for (std::size_t k = 0; k < cyc.size(); ++k) s += (k ? " -> " : "") + cyc[k];
            throw ModelError(s);
        }
        done[pick] = true;
        order.push_back(pick);
        for (auto k : kids[pick]) --pending[k];
    }
    return order;
}

/// Per-node conditional table of a bound model: P(value | parent row).
struct Kernel {
    std::vector<std::size_t> parents;  // model indices
    std::vector<std::size_t> radix;    // parent support sizes
    std::size_t width = 0;             // node support size
    std::vector<double> table;         // rows * width
    std::vector<std::size_t> forced;   // deterministic nodes: value index per row

    bool deterministic() const { return !forced.empty(); }
    std::size_t rows() const { return width ? table.size() / width : 0; }

    template <class Indices>
    std::size_t row_of(const Indices& value_index) const {
        std::size_t r = 0;
        for (std::size_t k = 0; k < parents.size(); ++k) r = r * radix[k] + value_index[parents[k]];
        return r;
    }
};

/// Tabulate one node of a bound model. Deterministic bodies are evaluated on every parent row.
inline Kernel node_kernel(const Model& m, std::size_t node) {
    Kernel k;
    const auto& v = m.variable(node);
    const auto& mech = m.mechanism(node);
    const auto& ps = mechanism_parents(mech);
    k.width = v.support.size();
    for (const auto& p : ps) {
        k.parents.push_back(m.index(p));
        k.radix.push_back(m.variable(p).support.size());
    }
    std::size_t rows = row_count(m, ps);
    k.table.assign(rows * k.width, 0.0);
    auto literal = [&](const Expr& e) {
        auto c = constant_value(e);
        if (!c) throw ModelError("variable '" + v.name + "': model has unbound parameters");
        return *c;
    };
    if (auto* r = std::get_if<RootMechanism>(&mech)) {
        for (std::size_t j = 0; j < k.width; ++j) k.table[j] = literal(r->probs[j]);
    } else if (auto* c = std::get_if<CptMechanism>(&mech)) {
        for (std::size_t row = 0; row < rows; ++row)
            for (std::size_t j = 0; j < k.width; ++j) k.table[row * k.width + j] = literal(c->rows[row][j]);
    } else {
        const auto& d = std::get<DeterministicMechanism>(mech);
        k.forced.resize(rows);
        std::optional<CompiledExpr> prog;
        if (!d.is_table()) {
            for (const auto& id : identifiers(d.expr()))
                if (std::find(ps.begin(), ps.end(), id) == ps.end())
                    throw ModelError("variable '" + v.name + "': expression references '" + id + "' which is not a parent");
            prog.emplace(d.expr(), ps);
        }
        std::vector<double> vals(ps.size());
        for (std::size_t row = 0; row < rows; ++row) {
            double out;
            if (prog) {
                auto idx = decode_row(m, ps, row);
                for (std::size_t q = 0; q < ps.size(); ++q) vals[q] = m.variable(k.parents[q]).support[idx[q]];
                try {
                    out = (*prog)(vals);
                } catch (const EvalError& err) {
                    throw ModelError("variable '" + v.name + "': " + err.what() + " at " + describe_row(m, ps, row));
                }
            } else {
                out = d.table()[row];
            }
            auto j = v.support.nearest_index(out);
            if (!j)
                throw ModelError("variable '" + v.name + "': value " + format_number(out) + " outside support at " +
                                 describe_row(m, ps, row));
            k.forced[row] = *j;
            k.table[row * k.width + *j] = 1.0;
        }
    }
    return k;
}

inline std::vector<Kernel> all_kernels(const Model& m) {
    std::vector<Kernel> ks;
    ks.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) ks.push_back(node_kernel(m, i));
    return ks;
}

/// Substitute parameter values and evaluate all probability entries.
/// The result has no parameters; throws ModelError on any invariant violation.
inline Model bind(const Model& m, const Assignment& bindings) {
    require_valid(m);
    std::map<std::string, Expr> subst;
    for (const auto& [name, value] : bindings) {
        const Parameter* p = m.parameter(name);
        if (!p) throw ModelError("unknown parameter '" + name + "'");
        if (!(value >= p->lower && value <= p->upper))
            throw ModelError("parameter '" + name + "' = " + format_number(value) + " outside [" + format_number(p->lower) +
                             ", " + format_number(p->upper) + "]");
        subst.emplace(name, Expr::literal(value));
    }
    for (const auto& p : m.parameters())
        if (!bindings.count(p.name)) throw ModelError("unbound parameter '" + p.name + "'");

    auto numeric = [&](const Expr& e, const std::string& ctx) {
        double v;
        try {
            v = *constant_value(substitute(e, subst));
        } catch (const EvalError& err) {
            throw ModelError(ctx + err.what());
        }
        if (!(v >= -1e-12 && v <= 1 + 1e-12)) throw ModelError(ctx + "probability " + format_number(v) + " outside [0,1]");
        return Expr::literal(std::clamp(v, 0.0, 1.0));
    };
    auto row = [&](const std::vector<Expr>& probs, const std::string& ctx) {
        std::vector<Expr> out;
        double sum = 0.0;
        for (const auto& e : probs) {
            out.push_back(numeric(e, ctx));
            sum += out.back().value();
        }
        if (std::fabs(sum - 1.0) > 1e-9) throw ModelError(ctx + "probabilities sum to " + format_number(sum));
        return out;
    };

    Model b;
    for (const auto& v : m.variables()) b.add_variable(v);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& name = m.variable(i).name;
        std::string where = "variable '" + name + "': ";
        const auto& mech = m.mechanism(i);
        if (auto* r = std::get_if<RootMechanism>(&mech)) {
            b.set_mechanism(name, RootMechanism{row(r->probs, where)});
        } else if (auto* c = std::get_if<CptMechanism>(&mech)) {
            CptMechanism out{c->parents, {}};
            for (std::size_t k = 0; k < c->rows.size(); ++k)
                out.rows.push_back(row(c->rows[k], where + "row " + describe_row(m, c->parents, k) + ": "));
            b.set_mechanism(name, std::move(out));
        } else {
            auto d = std::get<DeterministicMechanism>(mech);
            if (!d.is_table()) d.body = substitute(d.expr(), subst);
            b.set_mechanism(name, std::move(d));
        }
    }
    topological_order(b);
    for (std::size_t i = 0; i < b.size(); ++i)
        if (std::holds_alternative<DeterministicMechanism>(b.mechanism(i))) node_kernel(b, i);
    return b;
}

/// Product of all support sizes, as a double to avoid overflow.
inline double state_space_size(const Model& m) {
    double n = 1.0;
    for (const auto& v : m.variables()) n *= static_cast<double>(v.support.size());
    return n;
}

} // namespace pace
