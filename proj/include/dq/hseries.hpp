#pragma once

#include <string>
#include <vector>

#include "dq/scalar.hpp"

namespace dq {

/// Formal series in hbar truncated at a fixed order H: c0 + c1*h + ... + cH*h^H.
/// All arithmetic agrees with true series arithmetic mod h^{H+1}. Binary
/// operations require equal truncation orders.
template <class C>
class HSeries {
public:
    HSeries() = default;
    HSeries(int order, const C& zero) : c_(static_cast<std::size_t>(order) + 1, zero) {}

    static HSeries constant(int order, const C& zero, const C& value) {
        HSeries r(order, zero);
        r.c_[0] = value;
        return r;
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }
    const C& coeff(int i) const { return c_[static_cast<std::size_t>(i)]; }
    C& coeff(int i) { return c_[static_cast<std::size_t>(i)]; }

    bool is_zero() const {
        for (const auto& c : c_)
            if (!c.is_zero()) return false;
        return true;
    }
    /// True when the series is O(h^j).
    bool vanishes_below(int j) const {
        for (int i = 0; i < j && i <= order(); ++i)
            if (!c_[static_cast<std::size_t>(i)].is_zero()) return false;
        return true;
    }

    friend HSeries operator+(const HSeries& a, const HSeries& b) {
        a.compat(b);
        HSeries r = a;
        for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] += b.c_[i];
        return r;
    }
    friend HSeries operator-(const HSeries& a, const HSeries& b) {
        a.compat(b);
        HSeries r = a;
        for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] -= b.c_[i];
        return r;
    }
    HSeries operator-() const {
        HSeries r = *this;
        for (auto& c : r.c_) c = -c;
        return r;
    }
    friend HSeries operator*(const HSeries& a, const HSeries& b) {
        a.compat(b);
        HSeries r = a;
        for (auto& c : r.c_) c = c - c;  // zero of the right shape
        for (int i = 0; i <= a.order(); ++i) {
            if (a.coeff(i).is_zero()) continue;
            for (int j = 0; i + j <= a.order(); ++j)
                r.c_[static_cast<std::size_t>(i + j)] += a.coeff(i) * b.coeff(j);
        }
        return r;
    }
    HSeries& operator+=(const HSeries& o) { *this = *this + o; return *this; }
    HSeries& operator-=(const HSeries& o) { *this = *this - o; return *this; }
    HSeries& operator*=(const HSeries& o) { *this = *this * o; return *this; }

    friend bool operator==(const HSeries& a, const HSeries& b) { return a.c_ == b.c_; }
    friend bool operator!=(const HSeries& a, const HSeries& b) { return !(a == b); }

    HSeries scaled(const Rational& r) const {
        HSeries out = *this;
        for (auto& c : out.c_) c = c.scaled(r);
        return out;
    }
    HSeries scaled_coeff(const C& f) const {
        HSeries out = *this;
        for (auto& c : out.c_) c = c * f;
        return out;
    }
    /// Multiplication by h^j (coefficients above the truncation order drop).
    HSeries hbar_shifted(int j) const {
        HSeries out = *this;
        for (int i = order(); i >= 0; --i)
            out.c_[static_cast<std::size_t>(i)] = i >= j ? c_[static_cast<std::size_t>(i - j)]
                                                         : c_[static_cast<std::size_t>(i)] - c_[static_cast<std::size_t>(i)];
        return out;
    }

    HSeries derivative(int var) const {
        HSeries out = *this;
        for (auto& c : out.c_) c = c.derivative(var);
        return out;
    }
    HSeries integral(int var) const {
        HSeries out = *this;
        for (auto& c : out.c_) c = c.integral(var);
        return out;
    }
    HSeries substitute(int var, const C& value) const {
        HSeries out = *this;
        for (auto& c : out.c_) c = c.substitute(var, value);
        return out;
    }
    HSeries eval_partial(const std::map<int, Rational>& point) const {
        HSeries out = *this;
        for (auto& c : out.c_) c = c.eval_partial(point);
        return out;
    }

    /// Series inverse. Requires c0 to be a nonzero rational constant (in
    /// practice 1): anything else is a non-unital element.
    HSeries inverted() const {
        if (!c_[0].is_constant() || c_[0].is_zero())
            throw Error("HSeries: non-unital element");
        HSeries out = *this;
        C zero = c_[0] - c_[0];
        for (auto& c : out.c_) c = zero;
        Rational inv0 = c_[0].constant_value().inverse();
        out.c_[0] = c_[0].scaled(inv0 * inv0);  // = 1/c0 for constant c0
        for (int n = 1; n <= order(); ++n) {
            C acc = zero;
            for (int i = 1; i <= n; ++i) acc += c_[static_cast<std::size_t>(i)] * out.c_[static_cast<std::size_t>(n - i)];
            out.c_[static_cast<std::size_t>(n)] = -acc.scaled(inv0);
        }
        return out;
    }

    std::string to_string() const {
        std::string out;
        for (int i = 0; i <= order(); ++i) {
            if (c_[static_cast<std::size_t>(i)].is_zero()) continue;
            if (!out.empty()) out += " + ";
            std::string coeff = c_[static_cast<std::size_t>(i)].to_string();
            if (i == 0) out += coeff;
            else {
                std::string power = i == 1 ? "h" : "h^" + std::to_string(i);
                out += coeff == "1" ? power : "(" + coeff + ")*" + power;
            }
        }
        return out.empty() ? "0" : out;
    }

private:
    std::vector<C> c_;

    void compat(const HSeries& o) const {
        if (order() != o.order()) throw Error("HSeries: mismatched truncation orders");
    }
};

/// The coefficient type used throughout the geometry and operator layers.
using Series = HSeries<ScalarExpr>;

inline Series series_zero(VarSet vs, int order) { return Series(order, ScalarExpr(vs)); }
inline Series series_const(VarSet vs, int order, const Rational& c) {
    return Series::constant(order, ScalarExpr(vs), ScalarExpr(vs, c));
}
inline Series series_of(int order, const ScalarExpr& value) {
    return Series::constant(order, ScalarExpr(value.vars()), value);
}
inline Series series_one(VarSet vs, int order) { return series_const(vs, order, Rational(1)); }

}  // namespace dq
