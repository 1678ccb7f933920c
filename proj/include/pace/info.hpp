#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "joint.hpp"

namespace pace {

/// Shannon entropy in bits; 0 log 0 = 0.
inline double entropy(const Distribution& d) {
    double h = 0.0;
    for (double p : d.probabilities())
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

inline double joint_entropy(const JointTable& jt, const std::vector<std::string>& vars) {
    if (vars.empty()) return 0.0;
    return entropy(jt.marginal(vars));
}

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

/// H(Y | given) = H(Y, given) - H(given).
inline double cond_entropy(const JointTable& jt, const std::vector<std::string>& y, const std::vector<std::string>& given) {
    return joint_entropy(jt, concat(y, given)) - joint_entropy(jt, given);
}

/// I(X;Y) = H(Y) - H(Y|X).
inline double mutual_information(const JointTable& jt, const std::vector<std::string>& x, const std::vector<std::string>& y) {
    return joint_entropy(jt, y) - cond_entropy(jt, y, x);
}

inline double mutual_information(const JointTable& jt, const std::string& x, const std::string& y) {
    return mutual_information(jt, std::vector<std::string>{x}, std::vector<std::string>{y});
}

/// I(X;Y|Z) = H(Y|Z) - H(Y|X,Z).
inline double conditional_mutual_information(const JointTable& jt, const std::vector<std::string>& x,
                                             const std::vector<std::string>& y, const std::vector<std::string>& z) {
    return cond_entropy(jt, y, z) - cond_entropy(jt, y, concat(x, z));
}

inline double conditional_mutual_information(const JointTable& jt, const std::string& x, const std::string& y,
                                             const std::vector<std::string>& z) {
    return conditional_mutual_information(jt, std::vector<std::string>{x}, std::vector<std::string>{y}, z);
}

enum class LogBase { bits, nats };

inline double log_in(double x, LogBase base) { return base == LogBase::bits ? std::log2(x) : std::log(x); }

/// One term of sum P log(P/Q), checking absolute continuity.
inline double kl_term(double p, double q, LogBase base = LogBase::bits) {
    if (p <= 0.0) return 0.0;
    if (q <= 0.0) throw QueryError("KL divergence undefined: P has mass where Q has none");
    return p * log_in(p / q, base);
}

/// D(P || Q) over the same variables, in bits unless asked otherwise.
inline double kl_divergence(const Distribution& p, const Distribution& q, LogBase base = LogBase::bits) {
    if (p.variables() != q.variables()) throw QueryError("KL divergence needs distributions over the same variables");
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += kl_term(p[k], q[k], base);
    return s;
}

/// Product of the two marginals of a two-variable distribution.
inline Distribution product_of_marginals(const Distribution& pxy) {
    const auto& vs = pxy.variables();
    if (vs.size() != 2) throw QueryError("product_of_marginals needs a two-variable distribution");
    std::size_t nx = vs[0].support.size(), ny = vs[1].support.size();
    std::vector<double> px(nx, 0.0), py(ny, 0.0), out(nx * ny);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
            px[i] += pxy[i * ny + j];
            py[j] += pxy[i * ny + j];
        }
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) out[i * ny + j] = px[i] * py[j];
    return Distribution(vs, std::move(out));
}

} // namespace pace
