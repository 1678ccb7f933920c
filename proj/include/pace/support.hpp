#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pace {

/// Assignment of real values to named variables (or parameters).
using Assignment = std::map<std::string, double>;

/// Ordered, finite set of distinct real values.
class FiniteSupport {
public:
    FiniteSupport() = default;
    FiniteSupport(std::initializer_list<double> values) : values_(values) { check(); }
    explicit FiniteSupport(std::vector<double> values) : values_(std::move(values)) { check(); }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const noexcept { return values_; }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    /// Index of an exact member.
    std::optional<std::size_t> index_of(double v) const {
        auto it = std::lower_bound(values_.begin(), values_.end(), v);
        if (it == values_.end() || *it != v) return std::nullopt;
        return static_cast<std::size_t>(it - values_.begin());
    }

    /// Index of the member within `tol` of v (relative to max(1,|v|)).
    std::optional<std::size_t> nearest_index(double v, double tol = 1e-9) const {
        auto it = std::lower_bound(values_.begin(), values_.end(), v);
        double scale = std::max(1.0, std::fabs(v));
        if (it != values_.end() && std::fabs(*it - v) <= tol * scale)
            return static_cast<std::size_t>(it - values_.begin());
        if (it != values_.begin() && std::fabs(*(it - 1) - v) <= tol * scale)
            return static_cast<std::size_t>(it - values_.begin() - 1);
        return std::nullopt;
    }

    bool contains(double v) const { return index_of(v).has_value(); }

    friend bool operator==(const FiniteSupport&, const FiniteSupport&) = default;

private:
    void check() const {
        if (values_.empty()) throw ModelError("support must be non-empty");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) throw ModelError("support values must be finite");
            if (i > 0 && !(values_[i - 1] < values_[i]))
                throw ModelError("support values must be strictly increasing");
        }
    }

    std::vector<double> values_;
};

/// Strictly increasing list of support indices, length >= 2.
struct Partition {
    std::vector<std::size_t> indices;

    bool valid_for(std::size_t support_size) const {
        if (indices.size() < 2) return false;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] >= support_size) return false;
            if (i > 0 && indices[i - 1] >= indices[i]) return false;
        }
        return true;
    }

    friend bool operator==(const Partition&, const Partition&) = default;
};

/// Variable name plus support.
struct Variable {
    std::string name;
    FiniteSupport support;

    friend bool operator==(const Variable&, const Variable&) = default;
};

} // namespace pace
