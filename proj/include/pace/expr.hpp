#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "errors.hpp"

namespace pace {

enum class Op {
    literal,
    ref,
    neg,
    add,
    sub,
    mul,
    div,
    eq,
    ne,
    lt,
    le,
    gt,
    ge,
    land,
    lor,
    lnot,
    xor_,
    min,
    max,
    abs,
    cond,
};

struct ExprNode;

/// Immutable expression tree with shared structure.
class Expr {
public:
    Expr() : Expr(literal(0.0)) {}

    static Expr literal(double v);
    static Expr ref(std::string name);
    /// Unary minus; folds into negative literals so printing round-trips.
    static Expr negate(Expr e);
    static Expr unary(Op op, Expr e);
    static Expr binary(Op op, Expr a, Expr b);
    static Expr conditional(Expr c, Expr t, Expr e);

    Op op() const;
    double value() const;
    const std::string& name() const;
    const std::vector<Expr>& args() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
    std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
    Op op = Op::literal;
    double value = 0.0;
    std::string name;
    std::vector<Expr> args;
};

inline Expr Expr::literal(double v) { return Expr(std::make_shared<const ExprNode>(ExprNode{Op::literal, v, {}, {}})); }
inline Expr Expr::ref(std::string name) {
    return Expr(std::make_shared<const ExprNode>(ExprNode{Op::ref, 0.0, std::move(name), {}}));
}
inline Expr Expr::negate(Expr e) {
    if (e.op() == Op::literal) return literal(-e.value());
    return Expr(std::make_shared<const ExprNode>(ExprNode{Op::neg, 0.0, {}, {std::move(e)}}));
}
inline Expr Expr::unary(Op op, Expr e) {
    if (op == Op::neg) return negate(std::move(e));
    return Expr(std::make_shared<const ExprNode>(ExprNode{op, 0.0, {}, {std::move(e)}}));
}
inline Expr Expr::binary(Op op, Expr a, Expr b) {
    return Expr(std::make_shared<const ExprNode>(ExprNode{op, 0.0, {}, {std::move(a), std::move(b)}}));
}
inline Expr Expr::conditional(Expr c, Expr t, Expr e) {
    return Expr(std::make_shared<const ExprNode>(ExprNode{Op::cond, 0.0, {}, {std::move(c), std::move(t), std::move(e)}}));
}

inline Op Expr::op() const { return node_->op; }
inline double Expr::value() const { return node_->value; }
inline const std::string& Expr::name() const { return node_->name; }
inline const std::vector<Expr>& Expr::args() const { return node_->args; }

inline bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op()) return false;
    switch (a.op()) {
    case Op::literal: return a.value() == b.value();
    case Op::ref: return a.name() == b.name();
    default: return a.args() == b.args();
    }
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline int precedence(const Expr& e) {
    switch (e.op()) {
    case Op::cond: return 0;
    case Op::lor: return 1;
    case Op::land: return 2;
    case Op::lnot: return 3;
    case Op::eq: case Op::ne: case Op::lt: case Op::le: case Op::gt: case Op::ge: return 4;
    case Op::add: case Op::sub: return 5;
    case Op::mul: case Op::div: return 6;
    case Op::neg: return 7;
    case Op::literal: return e.value() < 0 || std::signbit(e.value()) ? 7 : 8;
    default: return 8;
    }
}

inline const char* symbol(Op op) {
    switch (op) {
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::eq: return "==";
    case Op::ne: return "!=";
    case Op::lt: return "<";
    case Op::le: return "<=";
    case Op::gt: return ">";
    case Op::ge: return ">=";
    case Op::land: return "and";
    case Op::lor: return "or";
    case Op::xor_: return "xor";
    case Op::min: return "min";
    case Op::max: return "max";
    case Op::abs: return "abs";
    default: return "?";
    }
}

inline void print(const Expr& e, int min_prec, std::string& out) {
    bool paren = precedence(e) < min_prec;
    if (paren) out += '(';
    const auto& a = e.args();
    switch (e.op()) {
    case Op::literal: out += format_number(e.value()); break;
    case Op::ref: out += e.name(); break;
    case Op::neg:
        out += '-';
        print(a[0], 7, out);
        break;
    case Op::lnot:
        out += "not ";
        print(a[0], 3, out);
        break;
    case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::land: case Op::lor: {
        int p = precedence(e);
        print(a[0], p, out);
        out += ' ';
        out += symbol(e.op());
        out += ' ';
        print(a[1], p + 1, out);
        break;
    }
    case Op::eq: case Op::ne: case Op::lt: case Op::le: case Op::gt: case Op::ge:
        print(a[0], 5, out);
        out += ' ';
        out += symbol(e.op());
        out += ' ';
        print(a[1], 5, out);
        break;
    case Op::xor_: case Op::min: case Op::max: case Op::abs:
        out += symbol(e.op());
        out += '(';
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i) out += ", ";
            print(a[i], 0, out);
        }
        out += ')';
        break;
    case Op::cond:
        out += "if ";
        print(a[0], 0, out);
        out += " then ";
        print(a[1], 0, out);
        out += " else ";
        print(a[2], 0, out);
        break;
    }
    if (paren) out += ')';
}

inline void collect(const Expr& e, std::vector<std::string>& out) {
    if (e.op() == Op::ref) {
        for (const auto& n : out)
            if (n == e.name()) return;
        out.push_back(e.name());
        return;
    }
    for (const auto& c : e.args()) collect(c, out);
}

} // namespace detail

/// Minimal-parenthesis text form, parseable by the model grammar.
inline std::string to_string(const Expr& e) {
    std::string out;
    detail::print(e, 0, out);
    return out;
}

/// Referenced identifiers in order of first appearance.
inline std::vector<std::string> identifiers(const Expr& e) {
    std::vector<std::string> out;
    detail::collect(e, out);
    return out;
}

/// Replace references by expressions.
inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& with) {
    if (e.op() == Op::literal) return e;
    if (e.op() == Op::ref) {
        auto it = with.find(e.name());
        return it == with.end() ? e : it->second;
    }
    const auto& a = e.args();
    switch (a.size()) {
    case 1: return Expr::unary(e.op(), substitute(a[0], with));
    case 2: return Expr::binary(e.op(), substitute(a[0], with), substitute(a[1], with));
    default: return Expr::conditional(substitute(a[0], with), substitute(a[1], with), substitute(a[2], with));
    }
}

/// Expression compiled to postfix code over numbered slots.
class CompiledExpr {
public:
    CompiledExpr() = default;

    /// Every identifier in `e` must appear in `slots`; its position is the slot index.
    CompiledExpr(const Expr& e, const std::vector<std::string>& slots) {
        std::size_t depth = 0;
        emit(e, slots, depth);
        max_depth_ = std::max<std::size_t>(max_depth_, 1);
    }

    double operator()(std::span<const double> slots) const {
        std::vector<double> st;
        st.reserve(max_depth_);
        std::size_t pc = 0;
        while (pc < code_.size()) {
            const Instr& in = code_[pc++];
            switch (in.code) {
            case Code::push: st.push_back(in.value); break;
            case Code::load: st.push_back(slots[in.arg]); break;
            case Code::jump: pc = in.arg; break;
            case Code::jump_if_false: {
                double c = st.back();
                st.pop_back();
                if (c != 0.0 && c != 1.0) throw EvalError("if condition must be 0 or 1, got " + format_number(c));
                if (c == 0.0) pc = in.arg;
                break;
            }
            case Code::neg: st.back() = -st.back(); break;
            case Code::abs: st.back() = std::fabs(st.back()); break;
            case Code::lnot: st.back() = truth(st.back(), "not") ? 0.0 : 1.0; break;
            default: {
                double b = st.back();
                st.pop_back();
                double& a = st.back();
                a = apply(in.code, a, b);
            }
            }
        }
        return st.back();
    }

private:
    enum class Code : std::uint8_t {
        push, load, jump, jump_if_false, neg, abs, lnot,
        add, sub, mul, div, eq, ne, lt, le, gt, ge, land, lor, xor_, min, max,
    };
    struct Instr {
        Code code;
        double value = 0.0;
        std::uint32_t arg = 0;
    };

    static bool truth(double v, const char* what) {
        if (v != 0.0 && v != 1.0)
            throw EvalError(std::string("operand of ") + what + " must be 0 or 1, got " + format_number(v));
        return v == 1.0;
    }

    static double apply(Code c, double a, double b) {
        switch (c) {
        case Code::add: return a + b;
        case Code::sub: return a - b;
        case Code::mul: return a * b;
        case Code::div:
            if (b == 0.0) throw EvalError("division by zero");
            return a / b;
        case Code::eq: return a == b ? 1.0 : 0.0;
        case Code::ne: return a != b ? 1.0 : 0.0;
        case Code::lt: return a < b ? 1.0 : 0.0;
        case Code::le: return a <= b ? 1.0 : 0.0;
        case Code::gt: return a > b ? 1.0 : 0.0;
        case Code::ge: return a >= b ? 1.0 : 0.0;
        case Code::land: return (truth(a, "and") & truth(b, "and")) ? 1.0 : 0.0;
        case Code::lor: return (truth(a, "or") | truth(b, "or")) ? 1.0 : 0.0;
        case Code::xor_: return (truth(a, "xor") != truth(b, "xor")) ? 1.0 : 0.0;
        case Code::min: return std::min(a, b);
        case Code::max: return std::max(a, b);
        default: return 0.0;
        }
    }

    static Code binary_code(Op op) {
        switch (op) {
        case Op::add: return Code::add;
        case Op::sub: return Code::sub;
        case Op::mul: return Code::mul;
        case Op::div: return Code::div;
        case Op::eq: return Code::eq;
        case Op::ne: return Code::ne;
        case Op::lt: return Code::lt;
        case Op::le: return Code::le;
        case Op::gt: return Code::gt;
        case Op::ge: return Code::ge;
        case Op::land: return Code::land;
        case Op::lor: return Code::lor;
        case Op::xor_: return Code::xor_;
        case Op::min: return Code::min;
        default: return Code::max;
        }
    }

    void emit(const Expr& e, const std::vector<std::string>& slots, std::size_t& depth) {
        const auto& a = e.args();
        switch (e.op()) {
        case Op::literal:
            code_.push_back({Code::push, e.value(), 0});
            bump(depth);
            return;
        case Op::ref: {
            for (std::size_t i = 0; i < slots.size(); ++i) {
                if (slots[i] == e.name()) {
                    code_.push_back({Code::load, 0.0, static_cast<std::uint32_t>(i)});
                    bump(depth);
                    return;
                }
            }
            throw QueryError("unknown identifier '" + e.name() + "'");
        }
        case Op::neg: emit(a[0], slots, depth); code_.push_back({Code::neg}); return;
        case Op::abs: emit(a[0], slots, depth); code_.push_back({Code::abs}); return;
        case Op::lnot: emit(a[0], slots, depth); code_.push_back({Code::lnot}); return;
        case Op::cond: {
            emit(a[0], slots, depth);
            --depth;
            std::size_t jf = code_.size();
            code_.push_back({Code::jump_if_false});
            emit(a[1], slots, depth);
            --depth;
            std::size_t j = code_.size();
            code_.push_back({Code::jump});
            code_[jf].arg = static_cast<std::uint32_t>(code_.size());
            emit(a[2], slots, depth);
            code_[j].arg = static_cast<std::uint32_t>(code_.size());
            return;
        }
        default:
            emit(a[0], slots, depth);
            emit(a[1], slots, depth);
            --depth;
            code_.push_back({binary_code(e.op())});
        }
    }

    void bump(std::size_t& depth) {
        ++depth;
        max_depth_ = std::max(max_depth_, depth);
    }

    std::vector<Instr> code_;
    std::size_t max_depth_ = 0;
};

/// Value of an expression without identifiers; nullopt if it references any.
inline std::optional<double> constant_value(const Expr& e) {
    if (e.op() == Op::literal) return e.value();
    if (!identifiers(e).empty()) return std::nullopt;
    return CompiledExpr(e, {})({});
}

/// Evaluate with every identifier looked up in `env`.
inline double evaluate(const Expr& e, const std::map<std::string, double>& env) {
    std::vector<std::string> names;
    std::vector<double> values;
    for (const auto& [k, v] : env) {
        names.push_back(k);
        values.push_back(v);
    }
    return CompiledExpr(e, names)(values);
}

} // namespace pace
