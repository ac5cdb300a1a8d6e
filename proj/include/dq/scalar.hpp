#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dq/rational.hpp"

namespace dq {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Chart variable declaration: m transversal coordinates x1..xm, k base
/// coordinates b1..bk, plus the three path/disk parameters t, s, u that are
/// always available. The variable order (x.., b.., t, s, u) is the canonical
/// order used for printing and term comparison.
struct VarSet {
    int m = 0;
    int k = 0;

    int nvars() const { return m + k + 3; }
    int x(int i) const { check(i >= 1 && i <= m, "x index"); return i - 1; }
    int b(int j) const { check(j >= 1 && j <= k, "b index"); return m + j - 1; }
    int t() const { return m + k; }
    int s() const { return m + k + 1; }
    int u() const { return m + k + 2; }

    bool is_x(int idx) const { return idx >= 0 && idx < m; }
    bool is_b(int idx) const { return idx >= m && idx < m + k; }

    std::string name(int idx) const {
        if (is_x(idx)) return "x" + std::to_string(idx + 1);
        if (is_b(idx)) return "b" + std::to_string(idx - m + 1);
        if (idx == t()) return "t";
        if (idx == s()) return "s";
        if (idx == u()) return "u";
        throw Error("VarSet: bad variable index");
    }

    friend bool operator==(const VarSet& a, const VarSet& b) { return a.m == b.m && a.k == b.k; }
    friend bool operator!=(const VarSet& a, const VarSet& b) { return !(a == b); }

private:
    static void check(bool ok, const char* what) {
        if (!ok) throw Error(std::string("VarSet: out-of-range ") + what);
    }
};

/// Exponent vector over a VarSet, compared lexicographically in the canonical
/// variable order (used both for the term order and for deterministic output).
struct Monomial {
    std::vector<std::uint16_t> e;

    explicit Monomial(int nvars = 0) : e(static_cast<std::size_t>(nvars), 0) {}

    int degree() const {
        int d = 0;
        for (auto v : e) d += v;
        return d;
    }
    int deg(int var) const { return e[static_cast<std::size_t>(var)]; }
    bool is_constant() const { return degree() == 0; }

    friend bool operator==(const Monomial& a, const Monomial& b) { return a.e == b.e; }
    friend bool operator<(const Monomial& a, const Monomial& b) { return a.e < b.e; }

    friend Monomial operator*(const Monomial& a, const Monomial& b) {
        Monomial r = a;
        for (std::size_t i = 0; i < r.e.size(); ++i) r.e[i] = static_cast<std::uint16_t>(r.e[i] + b.e[i]);
        return r;
    }
    /// nullopt unless b divides a.
    static std::optional<Monomial> try_div(const Monomial& a, const Monomial& b) {
        Monomial r = a;
        for (std::size_t i = 0; i < r.e.size(); ++i) {
            if (a.e[i] < b.e[i]) return std::nullopt;
            r.e[i] = static_cast<std::uint16_t>(a.e[i] - b.e[i]);
        }
        return r;
    }
};

/// Strict "later in canonical order" comparator: the map iterates from the
/// leading (lex-largest) term downward.
struct MonoAfter {
    bool operator()(const Monomial& a, const Monomial& b) const {
        for (std::size_t i = 0; i < a.e.size(); ++i)
            if (a.e[i] != b.e[i]) return a.e[i] > b.e[i];
        return false;
    }
};

/// Sparse multivariate polynomial with exact rational coefficients.
/// Zero coefficients are never stored, so representation equality is value
/// equality.
class Poly {
public:
    using Terms = std::map<Monomial, Rational, MonoAfter>;

    Poly() = default;
    explicit Poly(VarSet vs) : vs_(vs) {}
    Poly(VarSet vs, const Rational& c) : vs_(vs) {
        if (!c.is_zero()) terms_.emplace(Monomial(vs.nvars()), c);
    }
    static Poly var(VarSet vs, int idx, int power = 1) {
        Poly p(vs);
        Monomial mo(vs.nvars());
        mo.e[static_cast<std::size_t>(idx)] = static_cast<std::uint16_t>(power);
        p.terms_.emplace(std::move(mo), Rational(1));
        return p;
    }

    const VarSet& vars() const { return vs_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_one() const {
        return terms_.size() == 1 && terms_.begin()->first.is_constant() && terms_.begin()->second.is_one();
    }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_constant()); }
    Rational constant_value() const {
        if (terms_.empty()) return Rational(0);
        if (!is_constant()) throw Error("Poly: not a constant");
        return terms_.begin()->second;
    }

    int total_degree() const {
        int d = 0;
        for (const auto& [mo, c] : terms_) d = std::max(d, mo.degree());
        return d;
    }
    int degree_in(int var) const {
        int d = -1;
        for (const auto& [mo, c] : terms_) d = std::max(d, mo.deg(var));
        return d;  // -1 for the zero polynomial
    }
    bool depends_on(int var) const {
        for (const auto& [mo, c] : terms_)
            if (mo.deg(var) > 0) return true;
        return false;
    }

    void add_term(const Monomial& mo, const Rational& c) {
        if (c.is_zero()) return;
        auto it = terms_.find(mo);
        if (it == terms_.end()) { terms_.emplace(mo, c); return; }
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        a.compat(b);
        Poly r = a;
        for (const auto& [mo, c] : b.terms_) r.add_term(mo, c);
        return r;
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        a.compat(b);
        Poly r = a;
        for (const auto& [mo, c] : b.terms_) r.add_term(mo, -c);
        return r;
    }
    Poly operator-() const {
        Poly r = *this;
        for (auto& [mo, c] : r.terms_) c = -c;
        return r;
    }
    friend Poly operator*(const Poly& a, const Poly& b) {
        a.compat(b);
        Poly r(a.vs_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
        return r;
    }
    Poly scaled(const Rational& c) const {
        Poly r(vs_);
        if (c.is_zero()) return r;
        for (const auto& [mo, co] : terms_) r.terms_.emplace(mo, co * c);
        return r;
    }
    Poly& operator+=(const Poly& o) { *this = *this + o; return *this; }
    Poly& operator-=(const Poly& o) { *this = *this - o; return *this; }
    Poly& operator*=(const Poly& o) { *this = *this * o; return *this; }

    friend bool operator==(const Poly& a, const Poly& b) { return a.vs_ == b.vs_ && a.terms_ == b.terms_; }
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

    Poly derivative(int var) const {
        Poly r(vs_);
        for (const auto& [mo, c] : terms_) {
            int e = mo.deg(var);
            if (e == 0) continue;
            Monomial m2 = mo;
            m2.e[static_cast<std::size_t>(var)] = static_cast<std::uint16_t>(e - 1);
            r.add_term(m2, c * Rational(e));
        }
        return r;
    }

    /// Formal antiderivative with zero constant term.
    Poly integral(int var) const {
        Poly r(vs_);
        for (const auto& [mo, c] : terms_) {
            int e = mo.deg(var);
            Monomial m2 = mo;
            m2.e[static_cast<std::size_t>(var)] = static_cast<std::uint16_t>(e + 1);
            r.add_term(m2, c / Rational(e + 1));
        }
        return r;
    }

    Poly substitute(int var, const Poly& value) const {
        compat(value);
        Poly r(vs_);
        for (const auto& [mo, c] : terms_) {
            Monomial m2 = mo;
            int e = mo.deg(var);
            m2.e[static_cast<std::size_t>(var)] = 0;
            Poly term(vs_, c);
            Poly rest(vs_);
            rest.terms_.emplace(m2, Rational(1));
            term *= rest;
            for (int i = 0; i < e; ++i) term *= value;
            r += term;
        }
        return r;
    }

    /// Partial evaluation: substitute rational values for the given variables.
    Poly eval_partial(const std::map<int, Rational>& point) const {
        Poly r(vs_);
        for (const auto& [mo, c] : terms_) {
            Rational coeff = c;
            Monomial m2 = mo;
            for (const auto& [var, val] : point) {
                int e = mo.deg(var);
                if (e > 0) {
                    Rational p(1);
                    for (int i = 0; i < e; ++i) p *= val;
                    coeff *= p;
                    m2.e[static_cast<std::size_t>(var)] = 0;
                }
            }
            r.add_term(m2, coeff);
        }
        return r;
    }

    Rational eval(const std::map<int, Rational>& point) const {
        Poly r = eval_partial(point);
        if (!r.is_constant()) throw Error("Poly: eval left free variables");
        return r.constant_value();
    }

    const Rational& leading_coeff() const {
        if (terms_.empty()) throw Error("Poly: leading term of zero");
        return terms_.begin()->second;
    }
    const Monomial& leading_mono() const {
        if (terms_.empty()) throw Error("Poly: leading term of zero");
        return terms_.begin()->first;
    }

    /// Exact division; throws if the division leaves a remainder.
    friend Poly divexact(const Poly& a, const Poly& b) {
        a.compat(b);
        if (b.is_zero()) throw Error("Poly: division by zero");
        Poly q(a.vs_), r = a;
        while (!r.is_zero()) {
            auto mq = Monomial::try_div(r.leading_mono(), b.leading_mono());
            if (!mq) throw Error("Poly: inexact division");
            Rational cq = r.leading_coeff() / b.leading_coeff();
            Poly piece(a.vs_);
            piece.terms_.emplace(*mq, cq);
            q += piece;
            r -= piece * b;
        }
        return q;
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [mo, c] : terms_) {
            Rational ca = c.sign() < 0 ? -c : c;
            if (first) out += c.sign() < 0 ? "-" : "";
            else out += c.sign() < 0 ? " - " : " + ";
            first = false;
            std::string mono;
            for (std::size_t i = 0; i < mo.e.size(); ++i) {
                if (mo.e[i] == 0) continue;
                if (!mono.empty()) mono += "*";
                mono += vs_.name(static_cast<int>(i));
                if (mo.e[i] > 1) mono += "^" + std::to_string(mo.e[i]);
            }
            if (mono.empty()) out += ca.to_string();
            else if (ca.is_one()) out += mono;
            else out += ca.to_string() + "*" + mono;
        }
        return out;
    }

private:
    VarSet vs_;
    Terms terms_;

    void compat(const Poly& o) const {
        if (vs_ != o.vs_) throw Error("Poly: incompatible variable declarations");
    }
};

// ---------------------------------------------------------------------------
// Multivariate gcd via primitive pseudo-remainder sequences. Degrees in this
// library stay tiny, so the classical algorithm is plenty.
// ---------------------------------------------------------------------------

namespace detail {

inline int pick_main_var(const Poly& a, const Poly& b) {
    for (int v = a.vars().nvars() - 1; v >= 0; --v)
        if (a.depends_on(v) || b.depends_on(v)) return v;
    return -1;
}

/// Coefficient of var^e, viewed as a polynomial in the remaining variables.
inline Poly coeff_in(const Poly& p, int var, int e) {
    Poly r(p.vars());
    for (const auto& [mo, c] : p.terms()) {
        if (mo.deg(var) != e) continue;
        Monomial m2 = mo;
        m2.e[static_cast<std::size_t>(var)] = 0;
        r.add_term(m2, c);
    }
    return r;
}

inline Poly poly_gcd_impl(Poly a, Poly b);

/// gcd of the var-coefficients of p.
inline Poly content_in(const Poly& p, int var) {
    Poly c(p.vars());
    int d = p.degree_in(var);
    for (int e = 0; e <= d; ++e) {
        Poly ce = coeff_in(p, var, e);
        if (ce.is_zero()) continue;
        c = c.is_zero() ? ce : poly_gcd_impl(c, ce);
        if (c.is_constant()) break;
    }
    return c;
}

inline Poly pseudo_rem(Poly f, const Poly& g, int var) {
    int dg = g.degree_in(var);
    Poly lcg = coeff_in(g, var, dg);
    while (!f.is_zero() && f.degree_in(var) >= dg) {
        int df = f.degree_in(var);
        Poly lcf = coeff_in(f, var, df);
        Poly shift = Poly::var(f.vars(), var, df - dg);
        f = f * lcg - g * lcf * shift;
    }
    return f;
}

inline Poly poly_gcd_impl(Poly a, Poly b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_constant() || b.is_constant()) return Poly(a.vars(), Rational(1));
    int var = pick_main_var(a, b);
    Poly ca = content_in(a, var), cb = content_in(b, var);
    Poly c = poly_gcd_impl(ca, cb);
    Poly f = divexact(a, ca), g = divexact(b, cb);
    while (!g.is_zero()) {
        Poly r = pseudo_rem(f, g, var);
        f = std::move(g);
        if (r.is_zero()) { g = Poly(r.vars()); continue; }
        Poly cr = content_in(r, var);
        g = divexact(r, cr);
    }
    return c * f;
}

}  // namespace detail

/// Monic (leading coefficient 1) gcd; gcd(0,0) = 0.
inline Poly poly_gcd(const Poly& a, const Poly& b) {
    Poly g = detail::poly_gcd_impl(a, b);
    if (g.is_zero()) return g;
    return g.scaled(g.leading_coeff().inverse());
}

/// Scalar coefficient: a polynomial or, where pullbacks force it, a rational
/// function num/den. Canonical form: gcd(num, den) = 1 and den monic in the
/// canonical term order; a value with den = 1 is polynomial-tagged.
class ScalarExpr {
public:
    ScalarExpr() = default;
    explicit ScalarExpr(VarSet vs) : num_(vs), den_(vs, Rational(1)) {}
    ScalarExpr(VarSet vs, const Rational& c) : num_(vs, c), den_(vs, Rational(1)) {}
    explicit ScalarExpr(const Poly& p) : num_(p), den_(p.vars(), Rational(1)) {}
    ScalarExpr(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }

    static ScalarExpr var(VarSet vs, int idx, int power = 1) { return ScalarExpr(Poly::var(vs, idx, power)); }

    const VarSet& vars() const { return num_.vars(); }
    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_polynomial() const { return den_.is_one(); }
    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_.is_one() && den_.is_one(); }
    bool is_constant() const { return num_.is_constant() && den_.is_one(); }
    Rational constant_value() const {
        if (!is_constant()) throw Error("ScalarExpr: not a constant");
        return num_.constant_value();
    }
    const Poly& poly() const {
        if (!is_polynomial()) throw Error("ScalarExpr: not a polynomial");
        return num_;
    }
    bool depends_on(int var) const { return num_.depends_on(var) || den_.depends_on(var); }
    int total_degree() const { return std::max(num_.total_degree(), den_.total_degree()); }

    friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
        return ScalarExpr(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
        return ScalarExpr(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
        return ScalarExpr(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
        if (b.is_zero()) throw Error("ScalarExpr: division by zero");
        return ScalarExpr(a.num_ * b.den_, a.den_ * b.num_);
    }
    ScalarExpr operator-() const { ScalarExpr r = *this; r.num_ = -r.num_; return r; }
    ScalarExpr& operator+=(const ScalarExpr& o) { *this = *this + o; return *this; }
    ScalarExpr& operator-=(const ScalarExpr& o) { *this = *this - o; return *this; }
    ScalarExpr& operator*=(const ScalarExpr& o) { *this = *this * o; return *this; }
    ScalarExpr scaled(const Rational& c) const { return ScalarExpr(num_.scaled(c), den_); }

    friend bool operator==(const ScalarExpr& a, const ScalarExpr& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const ScalarExpr& a, const ScalarExpr& b) { return !(a == b); }

    ScalarExpr derivative(int var) const {
        if (is_polynomial()) return ScalarExpr(num_.derivative(var));
        return ScalarExpr(num_.derivative(var) * den_ - num_ * den_.derivative(var), den_ * den_);
    }

    ScalarExpr integral(int var) const {
        if (den_.depends_on(var)) throw Error("ScalarExpr: integral of non-polynomial dependence");
        return ScalarExpr(num_.integral(var), den_);
    }

    ScalarExpr substitute(int var, const ScalarExpr& value) const {
        // Substitute into num and den separately via Horner on the variable.
        auto subst_poly = [&](const Poly& p) {
            ScalarExpr acc(p.vars());
            int d = p.degree_in(var);
            if (d <= 0) return ScalarExpr(p);
            for (int e = d; e >= 0; --e) {
                acc = acc * value + ScalarExpr(detail::coeff_in(p, var, e));
            }
            return acc;
        };
        ScalarExpr n = subst_poly(num_), d = subst_poly(den_);
        if (d.is_zero()) throw Error("ScalarExpr: substitution made denominator vanish");
        return n / d;
    }

    Rational eval(const std::map<int, Rational>& point) const {
        Rational dv = den_.eval(point);
        if (dv.is_zero()) throw Error("ScalarExpr: denominator vanishes at evaluation point");
        return num_.eval(point) / dv;
    }

    ScalarExpr eval_partial(const std::map<int, Rational>& point) const {
        Poly d = den_.eval_partial(point);
        if (d.is_zero()) throw Error("ScalarExpr: denominator vanishes under partial evaluation");
        return ScalarExpr(num_.eval_partial(point), d);
    }

    std::string to_string() const {
        if (is_polynomial()) return num_.to_string();
        return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
    }

private:
    Poly num_, den_;

    void normalize() {
        if (den_.is_zero()) throw Error("ScalarExpr: zero denominator");
        if (num_.is_zero()) { den_ = Poly(num_.vars(), Rational(1)); return; }
        if (!den_.is_one()) {
            Poly g = poly_gcd(num_, den_);
            if (!g.is_one() && !g.is_zero()) { num_ = divexact(num_, g); den_ = divexact(den_, g); }
            Rational lc = den_.leading_coeff();
            if (!lc.is_one()) {
                num_ = num_.scaled(lc.inverse());
                den_ = den_.scaled(lc.inverse());
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Domain boxes and the guards that rational-function coefficients rely on:
// a sign-uniform grid check for denominators (documented as non-exhaustive)
// and a sound (not tight) interval bound for range checks.
// ---------------------------------------------------------------------------

/// Closed rational box for a subset of the chart variables. Variables not
/// listed default to [0,1] (the parameter variables t, s, u always do).
struct Box {
    std::map<int, std::pair<Rational, Rational>> ranges;

    std::pair<Rational, Rational> range(int var) const {
        auto it = ranges.find(var);
        if (it != ranges.end()) return it->second;
        return {Rational(0), Rational(1)};
    }
};

/// True when p has a single sign (never zero) at all points of the regular
/// (n+1)^d grid over the box, d = variables p actually depends on.
inline bool uniform_sign_on_grid(const Poly& p, const Box& box, int n = 4) {
    std::vector<int> vars;
    for (int v = 0; v < p.vars().nvars(); ++v)
        if (p.depends_on(v)) vars.push_back(v);
    std::map<int, Rational> point;
    int seen_sign = 0;
    std::vector<int> idx(vars.size(), 0);
    while (true) {
        for (std::size_t i = 0; i < vars.size(); ++i) {
            auto [lo, hi] = box.range(vars[i]);
            point[vars[i]] = lo + (hi - lo) * Rational(idx[i], n);
        }
        Rational v = p.eval(point);
        if (v.is_zero()) return false;
        if (seen_sign == 0) seen_sign = v.sign();
        else if (seen_sign != v.sign()) return false;
        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] > n) { idx[pos] = 0; ++pos; }
        if (pos == idx.size()) break;
        if (vars.empty()) break;
    }
    return true;
}

/// Sound interval enclosure of p over the box (monomial-wise, so not tight).
inline std::pair<Rational, Rational> interval_bound(const Poly& p, const Box& box) {
    auto mul_iv = [](std::pair<Rational, Rational> a, std::pair<Rational, Rational> b) {
        Rational c[4] = {a.first * b.first, a.first * b.second, a.second * b.first, a.second * b.second};
        Rational lo = c[0], hi = c[0];
        for (int i = 1; i < 4; ++i) {
            if (c[i] < lo) lo = c[i];
            if (hi < c[i]) hi = c[i];
        }
        return std::make_pair(lo, hi);
    };
    std::pair<Rational, Rational> total{Rational(0), Rational(0)};
    for (const auto& [mo, c] : p.terms()) {
        std::pair<Rational, Rational> iv{Rational(1), Rational(1)};
        for (std::size_t v = 0; v < mo.e.size(); ++v) {
            for (int i = 0; i < mo.deg(static_cast<int>(v)); ++i)
                iv = mul_iv(iv, box.range(static_cast<int>(v)));
        }
        iv = mul_iv(iv, {c, c});
        total.first += iv.first;
        total.second += iv.second;
    }
    return total;
}

}  // namespace dq
