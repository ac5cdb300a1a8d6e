#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dq/dirac.hpp"
#include "dq/linalg.hpp"
#include "dq/opform.hpp"
#include "dq/star.hpp"

namespace dq {

/// The data of a tight family of star products over the chart base: a b-
/// dependent star correction tau0, a connection 1-form tau1, and a curvature
/// potential 2-form tau2.
struct TightFamily {
    VarSet vs;
    int order = 0;
    PolyDiffOp tau0;                               // arity 2, O(hbar)
    std::map<int, PolyDiffOp> tau1;                // db_j -> arity-1 operator, O(hbar)
    std::map<std::pair<int, int>, PolyDiffOp> tau2;  // db_i ^ db_j (i < j) -> function

    TightFamily(VarSet v, int ord) : vs(v), order(ord), tau0(v, ord, 2) {}

    /// Degree constraints: tau0 and tau1 are O(hbar); tau0 annihilates
    /// constants (unitality); arities as displayed.
    void validate() const {
        if (tau0.arity() != 2 || !tau0.vanishes_below(1) || !tau0.annihilates_constants())
            throw Error("TightFamily: tau0 must be a unital O(hbar) 2-ary correction");
        for (const auto& [j, op] : tau1) {
            if (j < 1 || j > vs.k || op.arity() != 1) throw Error("TightFamily: bad tau1 component");
            if (!op.vanishes_below(1)) throw Error("TightFamily: tau1 must be O(hbar)");
        }
        for (const auto& [ij, op] : tau2) {
            if (ij.first < 1 || ij.second <= ij.first || ij.second > vs.k || op.arity() != 0)
                throw Error("TightFamily: bad tau2 component");
        }
    }

    OperatorForm as_form() const {
        OperatorForm f(vs, order);
        f.add_term({}, tau0);
        for (const auto& [j, op] : tau1) f.add_term({j}, op);
        for (const auto& [ij, op] : tau2) f.add_term({ij.first, ij.second}, op);
        return f;
    }
    /// m + tau as one Maurer-Cartan element.
    OperatorForm mc_element() const {
        OperatorForm f = as_form();
        f.add_term({}, PolyDiffOp::product(vs, order));
        return f;
    }

    StarProduct star() const { return StarProduct::make(tau0); }
    /// The fiber star product at a rational base point.
    StarProduct star_at(const std::map<int, Rational>& b_point) const {
        return StarProduct::make(tau0.map_coeffs([&](const Series& c) { return c.eval_partial(b_point); }));
    }
    /// tau2 evaluated on (d/db_i, d/db_j), as a function.
    Series tau2_at(int i, int j) const {
        Series z = series_zero(vs, order);
        auto it = tau2.find({std::min(i, j), std::max(i, j)});
        if (it == tau2.end()) return z;
        Series v = it->second.apply({});
        return i < j ? v : -v;
    }
};

struct Mc4Report {
    std::array<bool, 4> zero{true, true, true, true};
    std::array<std::string, 4> residual;
    bool ok() const { return zero[0] && zero[1] && zero[2] && zero[3]; }
};

/// The four component equations of the MC equation for m + tau:
///   1: [tau0+m, tau0+m]/2 = 0                       (0-form, 3-ary)
///   2: d tau0 + [tau0+m, tau1] = 0                  (1-form, 2-ary)
///   3: d tau1 + [tau1,tau1]/2 + [tau0+m, tau2] = 0  (2-form, 1-ary)
///   4: d tau2 + [tau1, tau2] = 0                    (3-form, 0-ary)
/// computed as the bidegree components of d(m+tau) + [m+tau, m+tau]/2. The
/// bracket [tau0+m, tau2] is the inner-derivation 2-form f -> tau2*f - f*tau2.
inline Mc4Report mc4_check(const TightFamily& t) {
    t.validate();
    OperatorForm full = t.mc_element();
    OperatorForm res = full.d_B() + bracket(full, full).scaled(Rational(1, 2));
    Mc4Report rep;
    const int q_of_eq[4] = {0, 1, 2, 3};
    for (int e = 0; e < 4; ++e) {
        OperatorForm comp = res.component(q_of_eq[e], 3 - e);
        rep.zero[static_cast<std::size_t>(e)] = comp.is_zero();
        if (!comp.is_zero()) rep.residual[static_cast<std::size_t>(e)] = comp.to_string();
    }
    return rep;
}

/// Bounds for the quantizer's correction search: polynomial coefficient
/// degree <= degree, per-slot derivative order <= diff_order.
struct CorrectorBounds {
    int degree = -1;      // -1: input degree + 2H
    int diff_order = -1;  // -1: 2H
};

namespace detail {

/// Flattens the h^n coefficient of an operator form into sparse coordinates.
struct FormCoords {
    // (db-word, arity, op key, monomial) -> dense index
    std::map<std::tuple<std::vector<int>, int, PolyDiffOp::Key, Monomial>, std::size_t> index;

    void collect(const OperatorForm& f, int at_order) {
        for (const auto& [k, op] : f.terms())
            for (const auto& [okey, c] : op.terms()) {
                const ScalarExpr& coeff = c.coeff(at_order);
                if (coeff.is_zero()) continue;
                if (!coeff.is_polynomial())
                    throw Error("quantize: correction solve needs polynomial residuals");
                for (const auto& [mono, r] : coeff.poly().terms()) {
                    auto key = std::make_tuple(k.first, k.second, okey, mono);
                    index.emplace(std::move(key), index.size());
                }
            }
    }
    std::vector<Rational> vectorize(const OperatorForm& f, int at_order) const {
        std::vector<Rational> v(index.size(), Rational(0));
        for (const auto& [k, op] : f.terms())
            for (const auto& [okey, c] : op.terms()) {
                const ScalarExpr& coeff = c.coeff(at_order);
                if (coeff.is_zero()) continue;
                for (const auto& [mono, r] : coeff.poly().terms()) {
                    auto it = index.find(std::make_tuple(k.first, k.second, okey, mono));
                    if (it == index.end()) throw Error("quantize: residual outside collected span");
                    v[it->second] = r;
                }
            }
        return v;
    }
};

/// Nonempty derivative multi-indices of total order in [lo, hi].
inline std::vector<XMulti> multis_upto(int m, int lo, int hi) {
    std::vector<XMulti> out;
    XMulti cur(m);
    auto rec = [&](auto&& self, int var, int used) -> void {
        if (var == m) {
            if (used >= lo) out.push_back(cur);
            return;
        }
        for (int take = 0; used + take <= hi; ++take) {
            cur.o[static_cast<std::size_t>(var)] = static_cast<std::uint16_t>(take);
            self(self, var + 1, used + take);
        }
        cur.o[static_cast<std::size_t>(var)] = 0;
    };
    rec(rec, 0, 0);
    return out;
}

/// Monomials of total degree <= d over the given variable indices.
inline std::vector<Monomial> monomials_over(VarSet vs, const std::vector<int>& vars, int d) {
    std::vector<Monomial> out;
    Monomial cur(vs.nvars());
    auto rec = [&](auto&& self, std::size_t at, int used) -> void {
        if (at == vars.size()) {
            out.push_back(cur);
            return;
        }
        for (int take = 0; used + take <= d; ++take) {
            cur.e[static_cast<std::size_t>(vars[at])] = static_cast<std::uint16_t>(take);
            self(self, at + 1, used + take);
        }
        cur.e[static_cast<std::size_t>(vars[at])] = 0;
    };
    rec(rec, 0, 0);
    return out;
}

}  // namespace detail

/// Deterministic truncated quantizer: seed tau0 = kontsevich2(sigma^{2,0})
/// pointwise in b, tau1 = hkr(sigma^{1,1}), tau2 = sigma^{0,2}; then an exact
/// order-by-order linear corrector drives the four MC residuals to zero
/// within the candidate space (polynomial coefficients of degree <= D over
/// the variables of the input, per-slot derivative order <= R). Free
/// variables of the solve are pinned to zero in a fixed column order, so the
/// output is deterministic.
inline TightFamily quantize_family(const HamiltonianFamily& fam, CorrectorBounds bounds = {}) {
    const Multivector& sigma = fam.sigma;
    const VarSet& vs = sigma.vars();
    const int order = sigma.order();

    TightFamily t(vs, order);
    Multivector pi = sigma.component(2, 0);
    if (!pi.is_zero()) t.tau0 = kontsevich2(pi).correction;
    for (int j = 1; j <= vs.k; ++j) {
        Multivector xj(vs, order);
        for (const auto& [w, c] : sigma.terms())
            if (w.p() == 1 && w.q() == 1 && w.db[0] == j) xj.add_term({w.dx, {}}, c);
        if (!xj.is_zero()) t.tau1.emplace(j, hkr(xj));
    }
    for (const auto& [w, c] : sigma.terms())
        if (w.p() == 0 && w.q() == 2)
            t.tau2.emplace(std::make_pair(w.db[0], w.db[1]), PolyDiffOp::function(vs, order, c));

    // candidate-space parameters
    int in_degree = 0;
    std::vector<bool> var_used(static_cast<std::size_t>(vs.nvars()), false);
    for (const auto& [w, c] : sigma.terms())
        for (int o = 0; o <= order; ++o) {
            if (c.coeff(o).is_zero()) continue;
            in_degree = std::max(in_degree, c.coeff(o).total_degree());
            for (int v = 0; v < vs.nvars(); ++v)
                if (c.coeff(o).depends_on(v)) var_used[static_cast<std::size_t>(v)] = true;
        }
    const int D = bounds.degree >= 0 ? bounds.degree : in_degree + 2 * order;
    const int R = bounds.diff_order >= 0 ? bounds.diff_order : 2 * order;
    std::vector<int> cand_vars;
    for (int v = 0; v < vs.m; ++v) cand_vars.push_back(v);
    for (int v = vs.m; v < vs.nvars(); ++v)
        if (var_used[static_cast<std::size_t>(v)]) cand_vars.push_back(v);

    for (int n = 1; n <= order; ++n) {
        OperatorForm full = t.mc_element();
        OperatorForm res = full.d_B() + bracket(full, full).scaled(Rational(1, 2));
        bool res_zero_at_n = true;
        for (const auto& [k, op] : res.terms())
            for (const auto& [okey, c] : op.terms())
                if (!c.coeff(n).is_zero()) res_zero_at_n = false;
        if (res_zero_at_n) continue;

        // Bianchi identity d(res) + [m+tau, res] = 0 must hold identically;
        // a failure here is a convention error, not a bounds problem.
        if (!(res.d_B() + bracket(full, res)).is_zero())
            throw Error("quantize: closedness check failed");

        // candidate corrections at order n
        std::vector<Monomial> monos = detail::monomials_over(vs, cand_vars, D);
        struct Cand {
            int group;  // 0: tau0, 1: tau1, 2: tau2 (column order)
            std::vector<int> word;
            PolyDiffOp op;
        };
        std::vector<Cand> cands;
        auto series_mono = [&](const Monomial& mo) {
            Series s = series_zero(vs, order);
            Poly p(vs);
            p.add_term(mo, Rational(1));
            s.coeff(n) = ScalarExpr(p);
            return s;
        };
        auto d2 = detail::multis_upto(vs.m, 1, R);
        for (const auto& a : d2)
            for (const auto& b : d2)
                for (const auto& mo : monos) {
                    PolyDiffOp op(vs, order, 2);
                    op.add_term({a, b}, series_mono(mo));
                    cands.push_back({0, {}, std::move(op)});
                }
        auto d1 = detail::multis_upto(vs.m, 0, R);
        for (int j = 1; j <= vs.k; ++j)
            for (const auto& a : d1)
                for (const auto& mo : monos) {
                    PolyDiffOp op(vs, order, 1);
                    op.add_term({a}, series_mono(mo));
                    cands.push_back({1, {j}, std::move(op)});
                }
        for (int i = 1; i <= vs.k; ++i)
            for (int j = i + 1; j <= vs.k; ++j)
                for (const auto& mo : monos) {
                    PolyDiffOp op(vs, order, 0);
                    op.add_term({}, series_mono(mo));
                    cands.push_back({2, {i, j}, std::move(op)});
                }

        // linearized effect at order n: d(C) + [m + tau, C]
        std::vector<OperatorForm> effects;
        effects.reserve(cands.size());
        detail::FormCoords coords;
        coords.collect(res, n);
        for (const auto& c : cands) {
            OperatorForm cf = OperatorForm::wrap(c.op, c.word);
            OperatorForm eff = cf.d_B() + bracket(full, cf);
            coords.collect(eff, n);
            effects.push_back(std::move(eff));
        }
        std::vector<std::vector<Rational>> mat(coords.index.size(),
                                               std::vector<Rational>(cands.size(), Rational(0)));
        for (std::size_t ci = 0; ci < cands.size(); ++ci) {
            auto col = coords.vectorize(effects[ci], n);
            for (std::size_t ri = 0; ri < col.size(); ++ri) mat[ri][ci] = col[ri];
        }
        std::vector<Rational> rhs = coords.vectorize(res, n);
        for (auto& r : rhs) r = -r;
        auto sol = solve_rational(std::move(mat), std::move(rhs));
        if (!sol)
            throw Error("quantize: obstruction not resolvable within bounds (D=" + std::to_string(D) +
                        ", R=" + std::to_string(R) + ") at order " + std::to_string(n));
        for (std::size_t ci = 0; ci < cands.size(); ++ci) {
            if ((*sol)[ci].is_zero()) continue;
            PolyDiffOp delta = cands[ci].op.scaled((*sol)[ci]);
            if (cands[ci].group == 0) t.tau0 += delta;
            else if (cands[ci].group == 1) {
                auto it = t.tau1.find(cands[ci].word[0]);
                if (it == t.tau1.end()) t.tau1.emplace(cands[ci].word[0], delta);
                else {
                    it->second += delta;
                    if (it->second.is_zero()) t.tau1.erase(it);
                }
            } else {
                auto key = std::make_pair(cands[ci].word[0], cands[ci].word[1]);
                auto it = t.tau2.find(key);
                if (it == t.tau2.end()) t.tau2.emplace(key, delta);
                else {
                    it->second += delta;
                    if (it->second.is_zero()) t.tau2.erase(it);
                }
            }
        }
    }

    Mc4Report final = mc4_check(t);
    if (!final.ok()) throw Error("quantize: corrected family fails mc4_check (internal error)");
    return t;
}

/// Builder for families with a b-independent star product and prescribed
/// connection generators: checks each generator is parallel (its second-
/// equation residual vanishes), then solves equation 3 for tau2 within the
/// monomial candidate space.
inline TightFamily gauge_family(const StarProduct& s, const std::map<int, PolyDiffOp>& generators,
                                int tau2_degree = -1) {
    const VarSet& vs = s.vars();
    const int order = s.order();
    TightFamily t(vs, order);
    t.tau0 = s.correction;

    OperatorForm m_tau0(vs, order);
    m_tau0.add_term({}, PolyDiffOp::product(vs, order) + t.tau0);
    int gen_degree = 0;
    for (const auto& [j, g] : generators) {
        if (g.is_zero()) continue;
        if (g.arity() != 1 || !g.vanishes_below(1))
            throw Error("gauge_family: generators must be O(hbar) 1-ary operators");
        OperatorForm gf = OperatorForm::wrap(g, {j});
        if (!bracket(m_tau0, gf).is_zero())
            throw Error("gauge_family: generator on db" + std::to_string(j) +
                        " is not parallel (second-equation residual nonzero)");
        t.tau1.emplace(j, g);
        for (const auto& [k, c] : g.terms())
            for (int o = 0; o <= order; ++o)
                if (!c.coeff(o).is_zero()) gen_degree = std::max(gen_degree, c.coeff(o).total_degree());
    }

    OperatorForm tau1_form(vs, order);
    for (const auto& [j, g] : t.tau1) tau1_form.add_term({j}, g);
    OperatorForm rho = tau1_form.d_B() + bracket(tau1_form, tau1_form).scaled(Rational(1, 2));
    if (!rho.is_zero()) {
        // solve [m + tau0, tau2] = -rho for tau2
        const int D = tau2_degree >= 0 ? tau2_degree : gen_degree + 2 * order;
        std::vector<int> vars;
        for (int v = 0; v < vs.m + vs.k; ++v) vars.push_back(v);
        std::vector<Monomial> monos = detail::monomials_over(vs, vars, D);
        struct Cand { std::pair<int, int> pair; int ord; Monomial mono; };
        std::vector<Cand> cands;
        std::vector<OperatorForm> effects;
        detail::FormCoords coords;
        for (int n = 0; n <= order; ++n) coords.collect(rho, n);
        for (int i = 1; i <= vs.k; ++i)
            for (int j2 = i + 1; j2 <= vs.k; ++j2)
                for (int o = 0; o <= order; ++o)
                    for (const auto& mo : monos) {
                        Series sc = series_zero(vs, order);
                        Poly p(vs);
                        p.add_term(mo, Rational(1));
                        sc.coeff(o) = ScalarExpr(p);
                        OperatorForm cf = OperatorForm::wrap(PolyDiffOp::function(vs, order, sc), {i, j2});
                        OperatorForm eff = bracket(m_tau0, cf);
                        for (int n = 0; n <= order; ++n) coords.collect(eff, n);
                        cands.push_back({{i, j2}, o, mo});
                        effects.push_back(std::move(eff));
                    }
        std::vector<std::vector<Rational>> mat(coords.index.size() * static_cast<std::size_t>(order + 1),
                                               std::vector<Rational>(cands.size(), Rational(0)));
        std::vector<Rational> rhs(coords.index.size() * static_cast<std::size_t>(order + 1), Rational(0));
        for (int n = 0; n <= order; ++n) {
            auto rv = coords.vectorize(rho, n);
            for (std::size_t ri = 0; ri < rv.size(); ++ri)
                rhs[static_cast<std::size_t>(n) * coords.index.size() + ri] = -rv[ri];
            for (std::size_t ci = 0; ci < cands.size(); ++ci) {
                auto col = coords.vectorize(effects[ci], n);
                for (std::size_t ri = 0; ri < col.size(); ++ri)
                    mat[static_cast<std::size_t>(n) * coords.index.size() + ri][ci] = col[ri];
            }
        }
        auto sol = solve_rational(std::move(mat), std::move(rhs));
        if (!sol) throw Error("gauge_family: curvature is not inner within the candidate space");
        for (std::size_t ci = 0; ci < cands.size(); ++ci) {
            if ((*sol)[ci].is_zero()) continue;
            Series sc = series_zero(vs, order);
            Poly p(vs);
            p.add_term(cands[ci].mono, (*sol)[ci]);
            sc.coeff(cands[ci].ord) = ScalarExpr(p);
            PolyDiffOp delta = PolyDiffOp::function(vs, order, sc);
            auto it = t.tau2.find(cands[ci].pair);
            if (it == t.tau2.end()) t.tau2.emplace(cands[ci].pair, delta);
            else it->second += delta;
        }
    }

    Mc4Report rep = mc4_check(t);
    if (!rep.ok()) throw Error("gauge_family: residual failure after solving for tau2");
    return t;
}

}  // namespace dq
