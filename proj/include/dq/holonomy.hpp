#pragma once

#include <string>
#include <vector>

#include "dq/family.hpp"

namespace dq {

/// Polynomial path in B, parameter t on [0,1]. Components may carry s and u
/// as free parameters (used for the tail paths of disk holonomy).
struct PathB {
    VarSet vs;
    std::vector<ScalarExpr> comp;  // k components

    explicit PathB(VarSet v) : vs(v), comp(static_cast<std::size_t>(v.k), ScalarExpr(v)) {}
    PathB(VarSet v, std::vector<ScalarExpr> c) : vs(v), comp(std::move(c)) {
        if (static_cast<int>(comp.size()) != vs.k) throw Error("PathB: wrong component count");
        for (const auto& e : comp)
            if (!e.is_polynomial()) throw Error("PathB: non-polynomial data");
    }

    /// Endpoint as a rational b-point (requires components free of s, u).
    std::map<int, Rational> at(const Rational& tval) const {
        std::map<int, Rational> pt;
        for (int j = 1; j <= vs.k; ++j)
            pt[vs.b(j)] = comp[static_cast<std::size_t>(j - 1)].eval({{vs.t(), tval}});
        return pt;
    }

    PathB reversed() const {
        PathB r = *this;
        ScalarExpr one_minus_t = ScalarExpr(vs, Rational(1)) - ScalarExpr::var(vs, vs.t());
        for (auto& c : r.comp) c = c.substitute(vs.t(), one_minus_t);
        return r;
    }
    /// Precompose the parameter with a polynomial map phi(t).
    PathB reparam(const ScalarExpr& phi) const {
        PathB r = *this;
        for (auto& c : r.comp) c = c.substitute(vs.t(), phi);
        return r;
    }
    /// Restriction to [a, b], reparameterized back to [0,1].
    PathB subinterval(const Rational& a, const Rational& b) const {
        ScalarExpr phi = ScalarExpr(vs, a) + ScalarExpr::var(vs, vs.t()).scaled(b - a);
        return reparam(phi);
    }
};

/// Truncated Dyson operator of the connection tau1 along a polynomial path:
///   Id + sum_{n>=1} (-1)^n int_{0<=t1<=...<=tn<=1} Dtau(tn)...Dtau(t1) dt,
/// with Dtau(t) = tau1(gamma'(t)) at b = gamma(t). Each factor is O(hbar),
/// so the sum stops at the truncation order. All iterated integrals of the
/// polynomial integrands are computed exactly.
inline PolyDiffOp transport_op(const TightFamily& fam, const PathB& path) {
    const VarSet& vs = fam.vs;
    const int order = fam.order;
    // Dtau(t): substitute b := gamma(t) into each tau1 component, weight by
    // the component derivative of gamma
    PolyDiffOp dtau(vs, order, 1);
    for (const auto& [j, op] : fam.tau1) {
        ScalarExpr speed = path.comp[static_cast<std::size_t>(j - 1)].derivative(vs.t());
        if (speed.is_zero()) continue;
        PolyDiffOp sub = op.map_coeffs([&](const Series& c) {
            Series out = c;
            for (int l = 1; l <= vs.k; ++l)
                out = out.substitute(vs.b(l), path.comp[static_cast<std::size_t>(l - 1)]);
            return out.scaled_coeff(speed);
        });
        dtau += sub;
    }
    PolyDiffOp result = PolyDiffOp::identity(vs, order);
    if (dtau.is_zero()) return result;
    // J_1(t) = int_0^t Dtau, J_n(t) = int_0^t Dtau o J_{n-1}; term n is
    // (-1)^n J_n(1)
    PolyDiffOp j_prev(vs, order, 1);
    for (int n = 1; n <= order; ++n) {
        PolyDiffOp integrand = n == 1 ? dtau : dtau.compose_at(0, j_prev);
        PolyDiffOp jn = integrand.map_coeffs([&](const Series& c) { return c.integral(vs.t()); });
        if (jn.is_zero()) break;
        PolyDiffOp at_one = jn.map_coeffs([&](const Series& c) {
            return c.substitute(vs.t(), ScalarExpr(vs, Rational(1)));
        });
        if (n % 2) result -= at_one;
        else result += at_one;
        j_prev = std::move(jn);
    }
    return result;
}

/// Transport along a concatenation of polynomial segments (first segment
/// traversed first).
inline PolyDiffOp transport_op(const TightFamily& fam, const std::vector<PathB>& segments) {
    PolyDiffOp t = PolyDiffOp::identity(fam.vs, fam.order);
    for (const auto& seg : segments) t = transport_op(fam, seg).compose_at(0, t);
    return t;
}

/// T(f *_{b0} g) - T(f) *_{b1} T(g) for the supplied pairs.
struct IsoCheckReport {
    bool ok = true;
    std::string detail;
};
inline IsoCheckReport transport_iso_check(const TightFamily& fam, const PathB& path,
                                          const std::vector<std::pair<Series, Series>>& pairs) {
    IsoCheckReport rep;
    PolyDiffOp t = transport_op(fam, path);
    StarProduct s0 = fam.star_at(path.at(Rational(0)));
    StarProduct s1 = fam.star_at(path.at(Rational(1)));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        Series lhs = t.apply({s0.star(pairs[i].first, pairs[i].second)});
        Series rhs = s1.star(t.apply({pairs[i].first}), t.apply({pairs[i].second}));
        if (!(lhs - rhs).is_zero()) {
            rep.ok = false;
            rep.detail = "pair " + std::to_string(i) + ": residual " + (lhs - rhs).to_string();
            return rep;
        }
    }
    return rep;
}

/// Star inverse of a unital element (leading coefficient 1) by Neumann
/// iteration: all higher terms are O(hbar).
inline Series star_inverse(const StarProduct& s, const Series& u) {
    if (!u.coeff(0).is_one()) throw Error("star_inverse: element is not unital");
    Series one = series_one(u.coeff(0).vars(), u.order());
    Series rem = one - u;  // O(hbar)
    Series inv = one, power = one;
    for (int n = 1; n <= u.order(); ++n) {
        power = s.star(power, rem);
        if (power.is_zero()) break;
        inv += power;
    }
    return inv;
}

/// Holonomy element e^lambda * unital: the log-scalar is kept exact and the
/// unital part has leading coefficient 1. Multiplication adds lambdas and
/// star-multiplies unital parts in the base-point algebra.
struct HolonomyElement {
    Rational lambda;
    Series unital;

    friend bool operator==(const HolonomyElement& a, const HolonomyElement& b) {
        return a.lambda == b.lambda && a.unital == b.unital;
    }
    HolonomyElement multiplied(const StarProduct& s, const HolonomyElement& o) const {
        return {lambda + o.lambda, s.star(unital, o.unital)};
    }
    std::string to_string() const {
        return "exp(" + lambda.to_string() + ") * (" + unital.to_string() + ")";
    }
};

/// Disk in B given as a grid of polynomial patches in (s, u), glued along
/// matching edges; a plain polynomial disk is a 1x1 grid. The base point is
/// the (0,0) corner, and the boundary is traversed bottom, right, top
/// (reversed), left (reversed).
struct PatchedDisk {
    VarSet vs;
    int ns = 1, nu = 1;
    // patch[i][j][c]: component c of the (i,j) patch, polynomial in (s,u)
    std::vector<std::vector<std::vector<ScalarExpr>>> patch;

    static PatchedDisk single(VarSet vs, std::vector<ScalarExpr> comps) {
        PatchedDisk d;
        d.vs = vs;
        d.patch = {{std::move(comps)}};
        d.validate();
        return d;
    }
    static PatchedDisk grid(VarSet vs, std::vector<std::vector<std::vector<ScalarExpr>>> patches) {
        PatchedDisk d;
        d.vs = vs;
        d.patch = std::move(patches);
        d.ns = static_cast<int>(d.patch.size());
        d.nu = static_cast<int>(d.patch[0].size());
        d.validate();
        return d;
    }
    /// Grid whose patches carry their own local charts (used together with a
    /// per-patch FamilyGrid); cross-patch edges live in different charts, so
    /// only per-patch validity is checked and edge agreement is the caller's
    /// invariant.
    static PatchedDisk grid_local(VarSet vs, std::vector<std::vector<std::vector<ScalarExpr>>> patches) {
        PatchedDisk d;
        d.vs = vs;
        d.patch = std::move(patches);
        d.ns = static_cast<int>(d.patch.size());
        d.nu = static_cast<int>(d.patch[0].size());
        d.validate(false);
        return d;
    }

    void validate(bool cross_edges = true) const {
        ScalarExpr zero(vs), one(vs, Rational(1));
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < nu; ++j) {
                const auto& p = at(i, j);
                if (static_cast<int>(p.size()) != vs.k) throw Error("PatchedDisk: wrong component count");
                for (const auto& c : p) {
                    if (!c.is_polynomial()) throw Error("PatchedDisk: non-polynomial data");
                    if (c.depends_on(vs.t())) throw Error("PatchedDisk: t is reserved for transports");
                }
                for (int c = 0; cross_edges && c < vs.k; ++c) {
                    if (i + 1 < ns &&
                        at(i, j)[static_cast<std::size_t>(c)].substitute(vs.s(), one) !=
                            at(i + 1, j)[static_cast<std::size_t>(c)].substitute(vs.s(), zero))
                        throw Error("PatchedDisk: s-edges do not match");
                    if (j + 1 < nu &&
                        at(i, j)[static_cast<std::size_t>(c)].substitute(vs.u(), one) !=
                            at(i, j + 1)[static_cast<std::size_t>(c)].substitute(vs.u(), zero))
                        throw Error("PatchedDisk: u-edges do not match");
                }
            }
    }

    const std::vector<ScalarExpr>& at(int i, int j) const {
        return patch[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }

    std::map<int, Rational> base_point() const {
        std::map<int, Rational> pt;
        for (int c = 1; c <= vs.k; ++c)
            pt[vs.b(c)] = at(0, 0)[static_cast<std::size_t>(c - 1)].eval({{vs.s(), Rational(0)}, {vs.u(), Rational(0)}});
        return pt;
    }

    /// Two disks concatenable along s glued into one (relation 3 pre).
    static PatchedDisk concat_s(const PatchedDisk& d1, const PatchedDisk& d2) {
        if (d1.nu != d2.nu) throw Error("PatchedDisk: incompatible u-grids");
        PatchedDisk d;
        d.vs = d1.vs;
        d.patch = d1.patch;
        d.patch.insert(d.patch.end(), d2.patch.begin(), d2.patch.end());
        d.ns = d1.ns + d2.ns;
        d.nu = d1.nu;
        d.validate();  // also checks the shared edge
        return d;
    }

    /// Path along the bottom edge of strip i: t -> patch[i][0](t, 0).
    PathB bottom(int i) const {
        PathB p(vs);
        ScalarExpr tvar = ScalarExpr::var(vs, vs.t()), zero(vs);
        for (int c = 0; c < vs.k; ++c)
            p.comp[static_cast<std::size_t>(c)] =
                at(i, 0)[static_cast<std::size_t>(c)].substitute(vs.u(), zero).substitute(vs.s(), tvar);
        return p;
    }
    PathB top(int i) const {  // forward orientation (left to right)
        PathB p(vs);
        ScalarExpr tvar = ScalarExpr::var(vs, vs.t()), one(vs, Rational(1));
        for (int c = 0; c < vs.k; ++c)
            p.comp[static_cast<std::size_t>(c)] =
                at(i, nu - 1)[static_cast<std::size_t>(c)].substitute(vs.u(), one).substitute(vs.s(), tvar);
        return p;
    }
    PathB left(int j) const {  // upward orientation
        PathB p(vs);
        ScalarExpr tvar = ScalarExpr::var(vs, vs.t()), zero(vs);
        for (int c = 0; c < vs.k; ++c)
            p.comp[static_cast<std::size_t>(c)] =
                at(0, j)[static_cast<std::size_t>(c)].substitute(vs.s(), zero).substitute(vs.u(), tvar);
        return p;
    }
    PathB right(int j) const {  // upward orientation
        PathB p(vs);
        ScalarExpr tvar = ScalarExpr::var(vs, vs.t()), one(vs, Rational(1));
        for (int c = 0; c < vs.k; ++c)
            p.comp[static_cast<std::size_t>(c)] =
                at(ns - 1, j)[static_cast<std::size_t>(c)].substitute(vs.s(), one).substitute(vs.u(), tvar);
        return p;
    }
};

/// Per-patch family data aligned with a PatchedDisk; the single-family case
/// uses the same family everywhere. When the grid is nontrivial the caller
/// guarantees the families agree along shared patch edges (the pullback
/// construction provides this by determinism).
struct FamilyGrid {
    std::vector<std::vector<TightFamily>> fam;  // [i][j]

    static FamilyGrid uniform(const TightFamily& t, int ns, int nu) {
        FamilyGrid g;
        g.fam.assign(static_cast<std::size_t>(ns),
                     std::vector<TightFamily>(static_cast<std::size_t>(nu), t));
        return g;
    }
    const TightFamily& at(int i, int j) const {
        return fam[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
};

/// Boundary transport of a patched disk: bottom edges, right column, top
/// edges reversed, left column reversed, each leg with its patch's family.
inline PolyDiffOp boundary_transport(const FamilyGrid& grid, const PatchedDisk& d) {
    const TightFamily& f00 = grid.at(0, 0);
    PolyDiffOp t = PolyDiffOp::identity(f00.vs, f00.order);
    auto step = [&](const TightFamily& f, const PathB& leg) { t = transport_op(f, leg).compose_at(0, t); };
    for (int i = 0; i < d.ns; ++i) step(grid.at(i, 0), d.bottom(i));
    for (int j = 0; j < d.nu; ++j) step(grid.at(d.ns - 1, j), d.right(j));
    for (int i = d.ns - 1; i >= 0; --i) step(grid.at(i, d.nu - 1), d.top(i).reversed());
    for (int j = d.nu - 1; j >= 0; --j) step(grid.at(0, j), d.left(j).reversed());
    return t;
}
inline PolyDiffOp boundary_transport(const TightFamily& fam, const PatchedDisk& d) {
    return boundary_transport(FamilyGrid::uniform(fam, d.ns, d.nu), d);
}

/// Disk holonomy: a(1) for the exact ODE a'(s) = a(s) * c(s), a(0) = 1, with
///   c(s) = - int_0^1 Phi_{s,u}^{-1}( tau2(d_s D, d_u D)|_{D(s,u)} ) du
/// and Phi_{s,u} the transport along (0,0) -> (s,0) -> (s,u). The global
/// sign of c is the ledger's holonomy sign, calibrated so that relation 1
/// reads T_boundary(f) = u * f * u^{-1}. The hbar^0 part of c accumulates
/// into the exact log-scalar lambda; everything higher goes into the unital
/// factor via Picard iteration.
inline HolonomyElement disk_holonomy(const FamilyGrid& grid, const PatchedDisk& d) {
    const TightFamily& f00 = grid.at(0, 0);
    const VarSet& vs = f00.vs;
    const int order = f00.order;
    StarProduct base_star = f00.star_at(d.base_point());
    ScalarExpr svar = ScalarExpr::var(vs, vs.s()), uvar = ScalarExpr::var(vs, vs.u());
    ScalarExpr tvar = ScalarExpr::var(vs, vs.t());
    ScalarExpr zero(vs), one(vs, Rational(1));

    Rational lambda(0);
    Series a = series_one(vs, order);
    for (int i = 0; i < d.ns; ++i) {
        // partial bottom of this strip: t -> patch[i][0](t s, 0)
        PathB pb(vs);
        for (int c = 0; c < vs.k; ++c)
            pb.comp[static_cast<std::size_t>(c)] =
                d.at(i, 0)[static_cast<std::size_t>(c)].substitute(vs.u(), zero).substitute(vs.s(), tvar * svar);
        PolyDiffOp h_partial_inv = transport_op(grid.at(i, 0), pb.reversed());

        Series c_strip = series_zero(vs, order);
        PolyDiffOp cols_done_inv = PolyDiffOp::identity(vs, order);
        for (int j = 0; j < d.nu; ++j) {
            // partial column of patch (i,j): t -> patch[i][j](s, t u)
            PathB pc(vs);
            for (int c = 0; c < vs.k; ++c)
                pc.comp[static_cast<std::size_t>(c)] =
                    d.at(i, j)[static_cast<std::size_t>(c)].substitute(vs.u(), tvar * uvar);
            PolyDiffOp v_partial_inv = transport_op(grid.at(i, j), pc.reversed());
            // tau2 evaluated on the coordinate frame of the patch
            Series two_form = series_zero(vs, order);
            for (int b1 = 1; b1 <= vs.k; ++b1)
                for (int b2 = b1 + 1; b2 <= vs.k; ++b2) {
                    Series g = grid.at(i, j).tau2_at(b1, b2);
                    if (g.is_zero()) continue;
                    for (int l = 1; l <= vs.k; ++l)
                        g = g.substitute(vs.b(l), d.at(i, j)[static_cast<std::size_t>(l - 1)]);
                    ScalarExpr jac =
                        d.at(i, j)[static_cast<std::size_t>(b1 - 1)].derivative(vs.s()) *
                            d.at(i, j)[static_cast<std::size_t>(b2 - 1)].derivative(vs.u()) -
                        d.at(i, j)[static_cast<std::size_t>(b2 - 1)].derivative(vs.s()) *
                            d.at(i, j)[static_cast<std::size_t>(b1 - 1)].derivative(vs.u());
                    two_form += g.scaled_coeff(jac);
                }
            if (!two_form.is_zero()) {
                // Phi^{-1} = reversed legs in reverse order
                PolyDiffOp tail_inv = v_partial_inv;
                tail_inv = cols_done_inv.compose_at(0, tail_inv);
                tail_inv = h_partial_inv.compose_at(0, tail_inv);
                // bottoms of strips 0..i-1, inverted by reversed legs
                for (int i2 = i - 1; i2 >= 0; --i2)
                    tail_inv = transport_op(grid.at(i2, 0), d.bottom(i2).reversed()).compose_at(0, tail_inv);
                Series pulled = tail_inv.apply({two_form});
                Series integrated = pulled.integral(vs.u()).substitute(vs.u(), one);
                c_strip += integrated;
            }
            // extend the full-column transports for the next patch
            PathB col(vs);
            for (int c = 0; c < vs.k; ++c)
                col.comp[static_cast<std::size_t>(c)] =
                    d.at(i, j)[static_cast<std::size_t>(c)].substitute(vs.u(), tvar);
            cols_done_inv = cols_done_inv.compose_at(0, transport_op(grid.at(i, j), col.reversed()));
        }
        if (!c_strip.is_zero()) {
            // hbar^0 part must be x-independent (central)
            ScalarExpr c0 = c_strip.coeff(0);
            for (int v = 0; v < vs.m; ++v)
                if (c0.depends_on(v)) throw Error("disk_holonomy: non-central classical curvature");
            lambda += c0.integral(vs.s()).substitute(vs.s(), ScalarExpr(vs, Rational(1))).constant_value();
            Series c_plus = c_strip;
            c_plus.coeff(0) = zero;
            // Picard: P(s) = 1 + int_0^s P * c_plus
            Series p = series_one(vs, order);
            for (int n = 1; n <= order; ++n) {
                Series integrand = base_star.star(p, c_plus);
                p = series_one(vs, order) + integrand.integral(vs.s());
            }
            Series p1 = p.substitute(vs.s(), one);
            a = base_star.star(a, p1);
        }
    }
    return {lambda, a};
}
inline HolonomyElement disk_holonomy(const TightFamily& fam, const PatchedDisk& d) {
    return disk_holonomy(FamilyGrid::uniform(fam, d.ns, d.nu), d);
}

struct RelationReport {
    bool ok = true;
    std::string detail;
};

/// Relation 1: the boundary transport is conjugation by the unital part of
/// the disk holonomy (the central e^lambda cancels).
inline RelationReport relation1_check(const FamilyGrid& grid, const PatchedDisk& d,
                                      const std::vector<Series>& test_functions) {
    RelationReport rep;
    HolonomyElement a = disk_holonomy(grid, d);
    PolyDiffOp t = boundary_transport(grid, d);
    StarProduct s = grid.at(0, 0).star_at(d.base_point());
    Series inv = star_inverse(s, a.unital);
    for (std::size_t i = 0; i < test_functions.size(); ++i) {
        Series lhs = t.apply({test_functions[i]});
        Series rhs = s.star(s.star(a.unital, test_functions[i]), inv);
        if (!(lhs - rhs).is_zero()) {
            rep.ok = false;
            rep.detail = "function " + std::to_string(i) + ": residual " + (lhs - rhs).to_string();
            return rep;
        }
    }
    return rep;
}
inline RelationReport relation1_check(const TightFamily& fam, const PatchedDisk& d,
                                      const std::vector<Series>& test_functions) {
    return relation1_check(FamilyGrid::uniform(fam, d.ns, d.nu), d, test_functions);
}

/// Relation 2: two parameterizations of the same disk with the same boundary
/// give the same holonomy element.
inline RelationReport relation2_check(const TightFamily& fam, const PatchedDisk& d1,
                                      const PatchedDisk& d2) {
    RelationReport rep;
    HolonomyElement a1 = disk_holonomy(fam, d1);
    HolonomyElement a2 = disk_holonomy(fam, d2);
    if (!(a1 == a2)) {
        rep.ok = false;
        rep.detail = "elements differ: " + a1.to_string() + " vs " + a2.to_string();
    }
    return rep;
}

/// Relation 3 on two disks glued along s (d1(1,.) = d2(0,.)): the holonomy
/// of the union is a_{d1,b} * T_gamma-bar(a_{d2,b'}), where b' = d2's base
/// corner and gamma-bar is the reversed bottom edge of d1 (so the second
/// element is transported back to b). This combines the multiplicativity and
/// naturality statements; the whisker transport realizes the base change.
inline RelationReport relation3_check(const TightFamily& fam, const PatchedDisk& d1,
                                      const PatchedDisk& d2) {
    RelationReport rep;
    PatchedDisk whole = PatchedDisk::concat_s(d1, d2);
    HolonomyElement a = disk_holonomy(fam, whole);
    HolonomyElement a1 = disk_holonomy(fam, d1);
    HolonomyElement a2 = disk_holonomy(fam, d2);
    // transport a2's unital part back along the reversed bottom of d1
    std::vector<PathB> back;
    for (int i = d1.ns - 1; i >= 0; --i) back.push_back(d1.bottom(i).reversed());
    PolyDiffOp t_back = transport_op(fam, back);
    HolonomyElement a2_at_b{a2.lambda, t_back.apply({a2.unital})};
    StarProduct s = fam.star_at(whole.base_point());
    HolonomyElement expect = a1.multiplied(s, a2_at_b);
    if (!(a == expect)) {
        rep.ok = false;
        rep.detail = "union holonomy " + a.to_string() + " vs product " + expect.to_string();
    }
    return rep;
}

/// Naturality half of relation 3: rotating the parameterization so the base
/// corner moves along the bottom edge gamma (an orientation-preserving
/// rotation R(s,u) = D(1-u, s)) transports the element by T_gamma.
inline RelationReport relation3_naturality_check(const TightFamily& fam, const PatchedDisk& d) {
    RelationReport rep;
    if (d.ns != 1 || d.nu != 1) throw Error("naturality check expects a single patch");
    const VarSet& vs = d.vs;
    ScalarExpr svar = ScalarExpr::var(vs, vs.s()), uvar = ScalarExpr::var(vs, vs.u());
    ScalarExpr one_minus_u = ScalarExpr(vs, Rational(1)) - uvar;
    std::vector<ScalarExpr> rot;
    for (int c = 0; c < vs.k; ++c) {
        // R(s,u) = D(1-u, s): substitute via a temporary stand-in for s
        ScalarExpr e = d.at(0, 0)[static_cast<std::size_t>(c)];
        e = e.substitute(vs.s(), ScalarExpr::var(vs, vs.t()));  // t as placeholder
        e = e.substitute(vs.u(), svar);
        e = e.substitute(vs.t(), one_minus_u);
        rot.push_back(e);
    }
    PatchedDisk r = PatchedDisk::single(vs, rot);
    HolonomyElement a_d = disk_holonomy(fam, d);
    HolonomyElement a_r = disk_holonomy(fam, r);
    PolyDiffOp t = transport_op(fam, d.bottom(0));
    HolonomyElement expect{a_d.lambda, t.apply({a_d.unital})};
    if (!(a_r == expect)) {
        rep.ok = false;
        rep.detail = "rebased holonomy " + a_r.to_string() + " vs transported " + expect.to_string();
    }
    return rep;
}

}  // namespace dq
