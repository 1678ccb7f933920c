#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "model.hpp"

namespace pace {

namespace dsl {

enum class Tok { ident, number, punct, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    double number = 0.0;
    std::size_t line = 1;
    std::size_t column = 1;
};

inline bool is_keyword(std::string_view s) {
    static const std::set<std::string_view> kw = {"param", "var", "root", "cpt", "def", "fun", "in",  "if",  "then",
                                                  "else",  "and", "or",   "not", "xor", "min", "max", "abs"};
    return kw.count(s) > 0;
}

inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.kind = Tok::ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.') {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
                    j = k;
                }
            }
            t.kind = Tok::number;
            t.text = std::string(src.substr(i, j - i));
            auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
            if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
                throw ParseError(line, col, "invalid number '" + t.text + "'");
            advance(j - i);
        } else {
            static const char* two[] = {"==", "!=", "<=", ">="};
            t.kind = Tok::punct;
            for (const char* op : two) {
                if (src.substr(i, 2) == op) t.text = op;
            }
            if (t.text.empty()) {
                if (std::string_view("{}()[],:|=<>+-*/").find(c) == std::string_view::npos)
                    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
                t.text = std::string(1, c);
            }
            advance(t.text.size());
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(lex(src)) {}

    Model parse_model() {
        while (peek().kind != Tok::end) statement();
        if (model_.size() == 0) throw ParseError(1, 1, "no variables declared");
        for (const auto& v : model_.variables())
            if (std::holds_alternative<std::monostate>(model_.mechanism(v.name)))
                error_at(var_loc_.at(v.name), "variable '" + v.name + "' has no mechanism");
        auto diags = validate(model_);
        if (!diags.empty()) {
            const std::string& d = diags.front();
            Token where = var_loc_.begin()->second;
            std::string name;
            if (d.rfind("variable '", 0) == 0) {
                name = d.substr(10, d.find('\'', 10) - 10);
            } else if (d.rfind("cycle detected: ", 0) == 0) {
                std::string rest = d.substr(16);
                name = rest.substr(0, rest.find(' '));
            }
            if (mech_loc_.count(name)) where = mech_loc_.at(name);
            error_at(where, d);
        }
        return model_;
    }

    Expr parse_standalone_expression() {
        Expr e = expression();
        if (peek().kind != Tok::end) error_at(peek(), "unexpected '" + peek().text + "' after expression");
        return e;
    }

private:
    [[noreturn]] static void error_at(const Token& t, const std::string& msg) { throw ParseError(t.line, t.column, msg); }

    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    Token next() {
        Token t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool at(std::string_view p) const {
        const Token& t = peek();
        return (t.kind == Tok::punct || t.kind == Tok::ident) && t.text == p;
    }
    bool accept(std::string_view p) {
        if (!at(p)) return false;
        next();
        return true;
    }
    Token expect(std::string_view p) {
        if (!at(p)) error_at(peek(), "expected '" + std::string(p) + "' but found " + describe(peek()));
        return next();
    }
    static std::string describe(const Token& t) {
        if (t.kind == Tok::end) return "end of input";
        return "'" + t.text + "'";
    }
    Token name() {
        const Token& t = peek();
        if (t.kind != Tok::ident || is_keyword(t.text)) error_at(t, "expected a name but found " + describe(t));
        return next();
    }

    double signed_number() {
        bool neg = accept("-");
        const Token& t = peek();
        if (t.kind != Tok::number) error_at(t, "expected a number but found " + describe(t));
        double v = next().number;
        if (accept("/")) {
            const Token& d = peek();
            if (d.kind != Tok::number) error_at(d, "expected a denominator but found " + describe(d));
            double den = next().number;
            if (den == 0.0) error_at(d, "zero denominator");
            v /= den;
        }
        return neg ? -v : v;
    }

    std::size_t variable_ref(const Token& t) {
        auto i = model_.find(t.text);
        if (!i) error_at(t, "unknown identifier '" + t.text + "'");
        return *i;
    }

    void statement() {
        const Token& t = peek();
        if (t.kind != Tok::ident) error_at(t, "expected a statement but found " + describe(t));
        if (t.text == "param") return param_stmt();
        if (t.text == "var") return var_stmt();
        if (t.text == "root") return root_stmt();
        if (t.text == "cpt") return cpt_stmt();
        if (t.text == "def") return def_stmt();
        if (t.text == "fun") return fun_stmt();
        error_at(t, "unknown statement '" + t.text + "'");
    }

    void declare_check(const Token& n) {
        if (model_.has_name(n.text)) error_at(n, "duplicate name '" + n.text + "'");
    }

    void param_stmt() {
        next();
        Token n = name();
        declare_check(n);
        expect("in");
        expect("[");
        double lo = signed_number();
        expect(",");
        double hi = signed_number();
        expect("]");
        if (!(lo <= hi)) error_at(n, "parameter '" + n.text + "' has lower bound above upper bound");
        model_.add_parameter({n.text, lo, hi});
    }

    void var_stmt() {
        next();
        Token n = name();
        declare_check(n);
        expect("in");
        Token open = expect("{");
        std::vector<double> vals;
        while (!at("}")) {
            vals.push_back(signed_number());
            accept(",");
        }
        expect("}");
        if (vals.empty()) error_at(open, "empty support for '" + n.text + "'");
        for (std::size_t k = 1; k < vals.size(); ++k)
            if (!(vals[k - 1] < vals[k])) error_at(open, "support of '" + n.text + "' must be strictly increasing");
        model_.add_variable({n.text, FiniteSupport(vals)});
        var_loc_.emplace(n.text, n);
    }

    std::size_t mechanism_target(const Token& stmt) {
        Token n = name();
        std::size_t i = variable_ref(n);
        if (!std::holds_alternative<std::monostate>(model_.mechanism(i)))
            error_at(n, "duplicate mechanism for '" + n.text + "'");
        mech_loc_.emplace(n.text, stmt);
        return i;
    }

    std::vector<std::string> parent_list(std::size_t self) {
        std::vector<std::string> ps;
        if (!accept("|")) return ps;
        do {
            Token p = name();
            std::size_t j = variable_ref(p);
            if (j == self) error_at(p, "variable '" + p.text + "' cannot be its own parent");
            for (const auto& q : ps)
                if (q == p.text) error_at(p, "duplicate parent '" + p.text + "'");
            ps.push_back(p.text);
        } while (accept(","));
        return ps;
    }

    std::size_t value_index(std::size_t var, const Token& where, double v) {
        auto j = model_.variable(var).support.index_of(v);
        if (!j)
            error_at(where, "value " + format_number(v) + " not in support of '" + model_.variable(var).name + "'");
        return *j;
    }

    std::vector<Expr> prob_row(std::size_t var) {
        const auto& sup = model_.variable(var).support;
        std::vector<std::optional<Expr>> row(sup.size());
        expect("{");
        while (!at("}")) {
            Token k = peek();
            double v = signed_number();
            std::size_t j = value_index(var, k, v);
            if (row[j]) error_at(k, "duplicate entry for value " + format_number(v));
            expect(":");
            Token e = peek();
            Expr pe = expression();
            for (const auto& id : identifiers(pe))
                if (!model_.parameter(id)) error_at(e, "probability may only reference parameters, found '" + id + "'");
            row[j] = pe;
            accept(",");
        }
        expect("}");
        std::vector<Expr> out;
        for (auto& e : row) out.push_back(e ? *e : Expr::literal(0.0));
        return out;
    }

    std::size_t row_key(const std::vector<std::string>& ps) {
        expect("(");
        std::size_t r = 0;
        for (std::size_t k = 0; k < ps.size(); ++k) {
            if (k) expect(",");
            Token t = peek();
            double v = signed_number();
            std::size_t pi = model_.index(ps[k]);
            r = r * model_.variable(pi).support.size() + value_index(pi, t, v);
        }
        if (!at(")")) error_at(peek(), "row key has more values than the " + std::to_string(ps.size()) + " parents");
        next();
        return r;
    }

    std::size_t checked_rows(const std::vector<std::string>& ps) {
        double n = 1.0;
        for (const auto& p : ps) n *= static_cast<double>(model_.variable(p).support.size());
        if (n > 1e6) error_at(peek(), "table has too many rows");
        return row_count(model_, ps);
    }

    void root_stmt() {
        Token stmt = next();
        std::size_t i = mechanism_target(stmt);
        model_.set_mechanism(model_.variable(i).name, RootMechanism{prob_row(i)});
    }

    void cpt_stmt() {
        Token stmt = next();
        std::size_t i = mechanism_target(stmt);
        auto ps = parent_list(i);
        std::size_t rows = checked_rows(ps);
        std::vector<std::optional<std::vector<Expr>>> table(rows);
        expect("{");
        while (!at("}")) {
            Token k = peek();
            std::size_t r = row_key(ps);
            if (table[r]) error_at(k, "duplicate row " + describe_row(model_, ps, r));
            expect(":");
            table[r] = prob_row(i);
            accept(",");
        }
        Token close = expect("}");
        CptMechanism c{ps, {}};
        for (std::size_t r = 0; r < rows; ++r) {
            if (!table[r]) error_at(close, "missing row " + describe_row(model_, ps, r) + " in table of '" + model_.variable(i).name + "'");
            c.rows.push_back(std::move(*table[r]));
        }
        model_.set_mechanism(model_.variable(i).name, std::move(c));
    }

    void def_stmt() {
        Token stmt = next();
        std::size_t i = mechanism_target(stmt);
        bool explicit_parents = at("|");
        auto ps = parent_list(i);
        expect("=");
        Token e = peek();
        Expr body = expression();
        const auto& self = model_.variable(i).name;
        if (!explicit_parents) {
            for (const auto& id : identifiers(body)) {
                if (id == self) error_at(e, "variable '" + id + "' cannot be its own parent");
                if (model_.find(id)) ps.push_back(id);
            }
        }
        for (const auto& id : identifiers(body)) {
            bool ok = model_.parameter(id) || std::find(ps.begin(), ps.end(), id) != ps.end();
            if (!ok) {
                if (model_.find(id)) error_at(e, "'" + id + "' is not a declared parent of '" + self + "'");
                error_at(e, "unknown identifier '" + id + "'");
            }
        }
        model_.set_mechanism(self, DeterministicMechanism{ps, body});
    }

    void fun_stmt() {
        Token stmt = next();
        std::size_t i = mechanism_target(stmt);
        auto ps = parent_list(i);
        std::size_t rows = checked_rows(ps);
        std::vector<std::optional<double>> table(rows);
        expect("{");
        while (!at("}")) {
            Token k = peek();
            std::size_t r = row_key(ps);
            if (table[r]) error_at(k, "duplicate row " + describe_row(model_, ps, r));
            expect(":");
            Token t = peek();
            double v = signed_number();
            value_index(i, t, v);
            table[r] = v;
            accept(",");
        }
        Token close = expect("}");
        std::vector<double> body;
        for (std::size_t r = 0; r < rows; ++r) {
            if (!table[r]) error_at(close, "missing row " + describe_row(model_, ps, r) + " in table of '" + model_.variable(i).name + "'");
            body.push_back(*table[r]);
        }
        model_.set_mechanism(model_.variable(i).name, DeterministicMechanism{ps, body});
    }

    // Expression grammar, lowest precedence first.
    struct Depth {
        explicit Depth(Parser& p) : p_(p) {
            if (++p_.depth_ > 200) error_at(p_.peek(), "expression nested too deeply");
        }
        ~Depth() { --p_.depth_; }
        Parser& p_;
    };

    Expr expression() {
        Depth guard(*this);
        if (accept("if")) {
            Expr c = expression();
            expect("then");
            Expr t = expression();
            expect("else");
            Expr e = expression();
            return Expr::conditional(std::move(c), std::move(t), std::move(e));
        }
        return or_expr();
    }

    Expr or_expr() {
        Expr e = and_expr();
        while (accept("or")) e = Expr::binary(Op::lor, e, and_expr());
        return e;
    }

    Expr and_expr() {
        Expr e = not_expr();
        while (accept("and")) e = Expr::binary(Op::land, e, not_expr());
        return e;
    }

    Expr not_expr() {
        Depth guard(*this);
        if (accept("not")) return Expr::unary(Op::lnot, not_expr());
        return cmp_expr();
    }

    Expr cmp_expr() {
        Expr e = add_expr();
        static const std::pair<const char*, Op> ops[] = {{"==", Op::eq}, {"!=", Op::ne}, {"<=", Op::le},
                                                         {">=", Op::ge}, {"<", Op::lt},  {">", Op::gt}};
        for (const auto& [sym, op] : ops) {
            if (peek().kind == Tok::punct && peek().text == sym) {
                next();
                return Expr::binary(op, e, add_expr());
            }
        }
        return e;
    }

    Expr add_expr() {
        Expr e = mul_expr();
        for (;;) {
            if (peek().kind == Tok::punct && peek().text == "+") {
                next();
                e = Expr::binary(Op::add, e, mul_expr());
            } else if (peek().kind == Tok::punct && peek().text == "-") {
                next();
                e = Expr::binary(Op::sub, e, mul_expr());
            } else {
                return e;
            }
        }
    }

    Expr mul_expr() {
        Expr e = unary_expr();
        for (;;) {
            if (peek().kind == Tok::punct && peek().text == "*") {
                next();
                e = Expr::binary(Op::mul, e, unary_expr());
            } else if (peek().kind == Tok::punct && peek().text == "/") {
                next();
                e = Expr::binary(Op::div, e, unary_expr());
            } else {
                return e;
            }
        }
    }

    Expr unary_expr() {
        Depth guard(*this);
        if (peek().kind == Tok::punct && peek().text == "-") {
            next();
            return Expr::negate(unary_expr());
        }
        return primary();
    }

    Expr primary() {
        Token t = peek();
        if (t.kind == Tok::number) {
            next();
            return Expr::literal(t.number);
        }
        if (t.kind == Tok::punct && t.text == "(") {
            next();
            Expr e = expression();
            expect(")");
            return e;
        }
        if (t.kind == Tok::ident) {
            static const std::map<std::string, std::pair<Op, int>> calls = {
                {"xor", {Op::xor_, 2}}, {"min", {Op::min, 2}}, {"max", {Op::max, 2}}, {"abs", {Op::abs, 1}}};
            auto c = calls.find(t.text);
            if (c != calls.end()) {
                next();
                expect("(");
                std::vector<Expr> args{expression()};
                while (accept(",")) args.push_back(expression());
                expect(")");
                if (static_cast<int>(args.size()) != c->second.second)
                    error_at(t, t.text + " expects " + std::to_string(c->second.second) + " argument(s)");
                if (args.size() == 1) return Expr::unary(c->second.first, args[0]);
                return Expr::binary(c->second.first, args[0], args[1]);
            }
            if (is_keyword(t.text)) error_at(t, "unexpected keyword '" + t.text + "' in expression");
            next();
            if (!standalone_ && !model_.has_name(t.text)) error_at(t, "unknown identifier '" + t.text + "'");
            return Expr::ref(t.text);
        }
        error_at(t, "expected an expression but found " + describe(t));
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    Model model_;
    std::map<std::string, Token> var_loc_;
    std::map<std::string, Token> mech_loc_;

public:
    bool standalone_ = false;
};

inline std::string join_numbers(const std::vector<double>& vs) {
    std::string s;
    for (std::size_t k = 0; k < vs.size(); ++k) s += (k ? ", " : "") + format_number(vs[k]);
    return s;
}

inline std::string row_key_text(const Model& m, const std::vector<std::string>& ps, std::size_t r) {
    auto idx = decode_row(m, ps, r);
    std::string s = "(";
    for (std::size_t k = 0; k < ps.size(); ++k) s += (k ? ", " : "") + format_number(m.variable(ps[k]).support[idx[k]]);
    return s + ")";
}

inline std::string prob_row_text(const FiniteSupport& sup, const std::vector<Expr>& row) {
    std::string s = "{";
    for (std::size_t j = 0; j < sup.size(); ++j) s += (j ? ", " : "") + format_number(sup[j]) + ": " + to_string(row[j]);
    return s + "}";
}

} // namespace dsl

/// Parse model text. Throws ParseError with a source location on any error.
inline Model parse_model(std::string_view text) { return dsl::Parser(text).parse_model(); }

inline Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

/// Parse a free-standing expression; identifiers are not resolved.
inline Expr parse_expression(std::string_view text) {
    dsl::Parser p(text);
    p.standalone_ = true;
    return p.parse_standalone_expression();
}

/// Text form accepted by parse_model; parse_model(serialize_model(m)) == m.
inline std::string serialize_model(const Model& m) {
    std::string out;
    for (const auto& p : m.parameters())
        out += "param " + p.name + " in [" + format_number(p.lower) + ", " + format_number(p.upper) + "]\n";
    if (!m.parameters().empty()) out += "\n";
    for (const auto& v : m.variables()) out += "var " + v.name + " in {" + dsl::join_numbers(v.support.values()) + "}\n";
    out += "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& v = m.variable(i);
        const auto& mech = m.mechanism(i);
        auto header = [&](const char* kw, const std::vector<std::string>& ps) {
            std::string s = std::string(kw) + " " + v.name;
            if (!ps.empty()) {
                s += " |";
                for (std::size_t k = 0; k < ps.size(); ++k) s += (k ? ", " : " ") + ps[k];
            }
            return s;
        };
        if (auto* r = std::get_if<RootMechanism>(&mech)) {
            out += "root " + v.name + " " + dsl::prob_row_text(v.support, r->probs) + "\n";
        } else if (auto* c = std::get_if<CptMechanism>(&mech)) {
            out += header("cpt", c->parents) + " {\n";
            for (std::size_t r = 0; r < c->rows.size(); ++r)
                out += "  " + dsl::row_key_text(m, c->parents, r) + ": " + dsl::prob_row_text(v.support, c->rows[r]) + "\n";
            out += "}\n";
        } else if (auto* d = std::get_if<DeterministicMechanism>(&mech)) {
            if (d->is_table()) {
                out += header("fun", d->parents) + " {\n";
                for (std::size_t r = 0; r < d->table().size(); ++r)
                    out += "  " + dsl::row_key_text(m, d->parents, r) + ": " + format_number(d->table()[r]) + "\n";
                out += "}\n";
            } else {
                std::vector<std::string> inferred;
                for (const auto& id : identifiers(d->expr()))
                    if (m.find(id)) inferred.push_back(id);
                bool implicit = inferred == d->parents;
                out += (implicit ? "def " + v.name : header("def", d->parents)) + " = " + to_string(d->expr()) + "\n";
            }
        }
    }
    return out;
}

} // namespace pace
