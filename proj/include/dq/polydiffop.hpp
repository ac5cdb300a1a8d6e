#pragma once

#include <map>
#include <string>
#include <vector>

#include "dq/hseries.hpp"

namespace dq {

/// Derivative multi-index over the x-variables of a chart.
struct XMulti {
    std::vector<std::uint16_t> o;

    explicit XMulti(int m = 0) : o(static_cast<std::size_t>(m), 0) {}
    static XMulti unit(int m, int i) {  // d/dx_i, 1-based
        XMulti r(m);
        r.o[static_cast<std::size_t>(i - 1)] = 1;
        return r;
    }
    int total() const {
        int t = 0;
        for (auto v : o) t += v;
        return t;
    }
    bool empty_index() const { return total() == 0; }
    friend XMulti operator+(const XMulti& a, const XMulti& b) {
        XMulti r = a;
        for (std::size_t i = 0; i < r.o.size(); ++i) r.o[i] = static_cast<std::uint16_t>(r.o[i] + b.o[i]);
        return r;
    }
    friend bool operator<(const XMulti& a, const XMulti& b) { return a.o < b.o; }
    friend bool operator==(const XMulti& a, const XMulti& b) { return a.o == b.o; }
    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < o.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(o[i]);
        }
        return s + ")";
    }
};

inline Series apply_multi(const XMulti& a, Series f) {
    for (std::size_t v = 0; v < a.o.size(); ++v)
        for (int n = 0; n < a.o[v]; ++n) f = f.derivative(static_cast<int>(v));
    return f;
}

/// k-ary multidifferential operator on M with series coefficients that may
/// depend on x and b. A 0-ary operator is a function; the 2-ary operator with
/// one empty-index term and coefficient 1 is the commutative product m.
class PolyDiffOp {
public:
    using Key = std::vector<XMulti>;
    using Terms = std::map<Key, Series>;

    PolyDiffOp() = default;
    PolyDiffOp(VarSet vs, int order, int arity) : vs_(vs), order_(order), arity_(arity) {}

    static PolyDiffOp function(VarSet vs, int order, const Series& f) {
        PolyDiffOp r(vs, order, 0);
        r.add_term({}, f);
        return r;
    }
    /// The pointwise product of two functions.
    static PolyDiffOp product(VarSet vs, int order) {
        PolyDiffOp r(vs, order, 2);
        r.add_term({XMulti(vs.m), XMulti(vs.m)}, series_one(vs, order));
        return r;
    }
    static PolyDiffOp identity(VarSet vs, int order) {
        PolyDiffOp r(vs, order, 1);
        r.add_term({XMulti(vs.m)}, series_one(vs, order));
        return r;
    }

    const VarSet& vars() const { return vs_; }
    int order() const { return order_; }
    int arity() const { return arity_; }
    int degree() const { return arity_ - 1; }  // shifted Gerstenhaber degree
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(Key key, const Series& c) {
        if (static_cast<int>(key.size()) != arity_) throw Error("PolyDiffOp: key arity mismatch");
        if (c.is_zero()) return;
        auto it = terms_.find(key);
        if (it == terms_.end()) terms_.emplace(std::move(key), c);
        else {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    friend PolyDiffOp operator+(const PolyDiffOp& a, const PolyDiffOp& b) {
        a.compat(b);
        PolyDiffOp r = a;
        for (const auto& [k, c] : b.terms_) r.add_term(k, c);
        return r;
    }
    friend PolyDiffOp operator-(const PolyDiffOp& a, const PolyDiffOp& b) {
        a.compat(b);
        PolyDiffOp r = a;
        for (const auto& [k, c] : b.terms_) r.add_term(k, -c);
        return r;
    }
    PolyDiffOp operator-() const {
        PolyDiffOp r = *this;
        for (auto& [k, c] : r.terms_) c = -c;
        return r;
    }
    PolyDiffOp& operator+=(const PolyDiffOp& o) { *this = *this + o; return *this; }
    PolyDiffOp& operator-=(const PolyDiffOp& o) { *this = *this - o; return *this; }
    PolyDiffOp scaled(const Rational& r) const {
        PolyDiffOp out = *this;
        for (auto& [k, c] : out.terms_) c = c.scaled(r);
        return out;
    }
    PolyDiffOp scaled_coeff(const Series& f) const {
        PolyDiffOp out(vs_, order_, arity_);
        for (const auto& [k, c] : terms_) out.add_term(k, c * f);
        return out;
    }
    PolyDiffOp hbar_shifted(int j) const {
        PolyDiffOp out(vs_, order_, arity_);
        for (const auto& [k, c] : terms_) out.add_term(k, c.hbar_shifted(j));
        return out;
    }
    /// Coefficient-wise map (b-derivatives, substitutions, evaluations).
    template <class F>
    PolyDiffOp map_coeffs(F&& f) const {
        PolyDiffOp out(vs_, order_, arity_);
        for (const auto& [k, c] : terms_) out.add_term(k, f(c));
        return out;
    }

    friend bool operator==(const PolyDiffOp& a, const PolyDiffOp& b) {
        return a.vs_ == b.vs_ && a.order_ == b.order_ && a.arity_ == b.arity_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const PolyDiffOp& a, const PolyDiffOp& b) { return !(a == b); }

    /// True when the series coefficient of every term vanishes below h^j.
    bool vanishes_below(int j) const {
        for (const auto& [k, c] : terms_)
            if (!c.vanishes_below(j)) return false;
        return true;
    }
    /// True when every term differentiates every slot at least once (such an
    /// operator annihilates constant arguments; used for unitality).
    bool annihilates_constants() const {
        for (const auto& [k, c] : terms_)
            for (const auto& mi : k)
                if (mi.empty_index()) return false;
        return true;
    }

    Series apply(const std::vector<Series>& args) const {
        if (static_cast<int>(args.size()) != arity_) throw Error("PolyDiffOp: arity mismatch in apply");
        Series acc = series_zero(vs_, order_);
        for (const auto& [k, c] : terms_) {
            Series t = c;
            for (int s = 0; s < arity_; ++s)
                t *= apply_multi(k[static_cast<std::size_t>(s)], args[static_cast<std::size_t>(s)]);
            acc += t;
        }
        return acc;
    }

    /// Insertion P o_i Q (0-based slot): the derivative multi-index on the
    /// consumed slot distributes over Q's coefficient and argument slots by
    /// the Leibniz rule.
    PolyDiffOp compose_at(int slot, const PolyDiffOp& q) const {
        compat(q);
        if (slot < 0 || slot >= arity_) throw Error("PolyDiffOp: bad insertion slot");
        PolyDiffOp r(vs_, order_, arity_ + q.arity_ - 1);
        for (const auto& [pk, pc] : terms_) {
            const XMulti& alpha = pk[static_cast<std::size_t>(slot)];
            for (const auto& [qk, qc] : q.terms_) {
                // enumerate splittings alpha = gamma_0 + ... + gamma_q with
                // multinomial coefficients variable by variable
                std::vector<std::pair<std::vector<XMulti>, Rational>> splits;
                splits.emplace_back(std::vector<XMulti>(static_cast<std::size_t>(q.arity_) + 1, XMulti(vs_.m)),
                                    Rational(1));
                for (int v = 0; v < vs_.m; ++v) {
                    int total = alpha.o[static_cast<std::size_t>(v)];
                    if (total == 0) continue;
                    std::vector<std::pair<std::vector<XMulti>, Rational>> next;
                    std::vector<int> parts(static_cast<std::size_t>(q.arity_) + 1, 0);
                    // compositions of `total` into q.arity_+1 parts
                    auto rec = [&](auto&& self, int pos, int remaining, const Rational& mult) -> void {
                        if (pos == static_cast<int>(parts.size()) - 1) {
                            parts[static_cast<std::size_t>(pos)] = remaining;
                            Rational coeff = mult;
                            // multinomial total! / prod parts!
                            for (const auto& [gs, c0] : splits) {
                                auto g2 = gs;
                                for (std::size_t bkt = 0; bkt < g2.size(); ++bkt)
                                    g2[bkt].o[static_cast<std::size_t>(v)] =
                                        static_cast<std::uint16_t>(parts[bkt]);
                                next.emplace_back(std::move(g2), c0 * coeff);
                            }
                            return;
                        }
                        for (int take = 0; take <= remaining; ++take) {
                            parts[static_cast<std::size_t>(pos)] = take;
                            self(self, pos + 1, remaining - take, mult);
                        }
                    };
                    // multinomial coefficients: compute total!/(prod parts!) lazily
                    // via a second pass (rec keeps mult = 1, fix below)
                    rec(rec, 0, total, Rational(1));
                    // attach multinomial factors
                    for (auto& [gs, c0] : next) {
                        BigInt num(1);
                        for (int t2 = 2; t2 <= total; ++t2) num *= BigInt(t2);
                        BigInt den(1);
                        for (const auto& g : gs) {
                            int pv = g.o[static_cast<std::size_t>(v)];
                            for (int t2 = 2; t2 <= pv; ++t2) den *= BigInt(t2);
                        }
                        c0 *= Rational(num, den);
                    }
                    splits = std::move(next);
                }
                for (const auto& [gs, mult] : splits) {
                    Series coeff = pc.scaled(mult) * apply_multi(gs[0], qc);
                    if (coeff.is_zero()) continue;
                    Key key;
                    key.reserve(static_cast<std::size_t>(r.arity_));
                    for (int s2 = 0; s2 < slot; ++s2) key.push_back(pk[static_cast<std::size_t>(s2)]);
                    for (int s2 = 0; s2 < q.arity_; ++s2)
                        key.push_back(gs[static_cast<std::size_t>(s2) + 1] + qk[static_cast<std::size_t>(s2)]);
                    for (int s2 = slot + 1; s2 < arity_; ++s2) key.push_back(pk[static_cast<std::size_t>(s2)]);
                    r.add_term(std::move(key), coeff);
                }
            }
        }
        return r;
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string out;
        for (const auto& [k, c] : terms_) {
            if (!out.empty()) out += "  +  ";
            out += "(" + c.to_string() + ")";
            for (const auto& mi : k) out += " D" + mi.to_string();
        }
        return out;
    }

private:
    VarSet vs_;
    int order_ = 0;
    int arity_ = 0;
    Terms terms_;

    void compat(const PolyDiffOp& o) const {
        if (vs_ != o.vs_ || order_ != o.order_)
            throw Error("PolyDiffOp: incompatible chart or truncation order");
    }
};

/// Gerstenhaber circle product P o Q = sum_i (-1)^{(i-1)(arity Q - 1)} P o_i Q.
inline PolyDiffOp gerstenhaber_circle(const PolyDiffOp& p, const PolyDiffOp& q) {
    PolyDiffOp r(p.vars(), p.order(), p.arity() + q.arity() - 1);
    for (int i = 0; i < p.arity(); ++i) {
        PolyDiffOp ins = p.compose_at(i, q);
        if ((i * q.degree()) % 2) r -= ins;
        else r += ins;
    }
    return r;
}

/// Gerstenhaber bracket on shifted degrees: [P,Q] = PoQ - (-1)^{pq} QoP.
inline PolyDiffOp gerstenhaber(const PolyDiffOp& p, const PolyDiffOp& q) {
    PolyDiffOp r = gerstenhaber_circle(p, q);
    PolyDiffOp qp = gerstenhaber_circle(q, p);
    if ((p.degree() * q.degree()) % 2) r += qp;
    else r -= qp;
    return r;
}

/// Hochschild differential [m, P]. On a 2-cochain this equals minus the
/// textbook (dP)(f,g,h) = f P(g,h) - P(fg,h) + P(f,gh) - P(f,g)h; the sign is
/// recorded in the conventions ledger.
inline PolyDiffOp hochschild_d(const PolyDiffOp& p) {
    return gerstenhaber(PolyDiffOp::product(p.vars(), p.order()), p);
}

}  // namespace dq
