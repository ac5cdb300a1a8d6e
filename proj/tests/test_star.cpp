#include <doctest.h>

#include "dq/parser.hpp"
#include "dq/random.hpp"
#include "dq/star.hpp"

using namespace dq;

namespace {

Multivector mv(VarSet vs, int order, std::initializer_list<std::pair<const char*, WedgeWord>> terms) {
    Multivector a(vs, order);
    for (const auto& [text, w] : terms) a.add_term(w, parse_series(text, vs, order));
    return a;
}

/// All monomials in x of total degree <= d.
std::vector<Series> monomials(VarSet vs, int order, int d) {
    std::vector<Series> out;
    std::vector<int> e(static_cast<std::size_t>(vs.m), 0);
    auto rec = [&](auto&& self, int var, int left) -> void {
        if (var == vs.m) {
            Poly p(vs, Rational(1));
            for (int v = 0; v < vs.m; ++v)
                p *= Poly::var(vs, v, e[static_cast<std::size_t>(v)]);
            out.push_back(series_of(order, ScalarExpr(p)));
            return;
        }
        for (int take = 0; take <= left; ++take) {
            e[static_cast<std::size_t>(var)] = take;
            self(self, var + 1, left - take);
        }
    };
    rec(rec, 0, d);
    return out;
}

PolyDiffOp random_op(Rng& rng, VarSet vs, int arity, int max_order_per_slot = 2) {
    PolyDiffOp p(vs, 0, arity);
    for (int t = 0; t < 2; ++t) {
        PolyDiffOp::Key key;
        for (int s = 0; s < arity; ++s) {
            XMulti mi(vs.m);
            int total = rng.below(max_order_per_slot + 1);
            for (int i = 0; i < total; ++i) {
                int v = rng.below(vs.m);
                mi.o[static_cast<std::size_t>(v)] = static_cast<std::uint16_t>(mi.o[static_cast<std::size_t>(v)] + 1);
            }
            key.push_back(mi);
        }
        p.add_term(std::move(key), series_of(0, rng.scalar(vs, 2, 2)));
    }
    return p;
}

}  // namespace

TEST_CASE("apply and product") {
    VarSet vs{2, 0};
    PolyDiffOp p(vs, 0, 2);
    p.add_term({XMulti::unit(2, 1), XMulti::unit(2, 2)}, series_one(vs, 0));
    Series x1sq = parse_series("x1^2", vs, 0), x2 = parse_series("x2", vs, 0);
    CHECK(p.apply({x1sq, x2}) == parse_series("2*x1", vs, 0));
    CHECK(PolyDiffOp::identity(vs, 0).apply({x1sq}) == x1sq);
    CHECK(PolyDiffOp::product(vs, 0).apply({parse_series("x1", vs, 0), x2}) ==
          parse_series("x1*x2", vs, 0));
}

TEST_CASE("hochschild differential") {
    VarSet vs{2, 0};
    // [m, f] is the zero 1-ary operator
    PolyDiffOp f = PolyDiffOp::function(vs, 0, parse_series("x1*x2", vs, 0));
    CHECK(hochschild_d(f).is_zero());
    // [m, V] = 0 for a vector field (derivation property)
    PolyDiffOp v(vs, 0, 1);
    v.add_term({XMulti::unit(2, 1)}, parse_series("x2", vs, 0));
    CHECK(hochschild_d(v).is_zero());
    // a product of two derivations is a cocycle
    PolyDiffOp dd(vs, 0, 2);
    dd.add_term({XMulti::unit(2, 1), XMulti::unit(2, 1)}, series_one(vs, 0));
    CHECK(hochschild_d(dd).is_zero());
    // [m, d1^2 ox d1] equals minus the textbook three-argument formula
    PolyDiffOp p(vs, 0, 2);
    p.add_term({XMulti::unit(2, 1) + XMulti::unit(2, 1), XMulti::unit(2, 1)}, series_one(vs, 0));
    PolyDiffOp d = hochschild_d(p);
    CHECK_FALSE(d.is_zero());
    CHECK(d.arity() == 3);
    Series fs = parse_series("x1^2", vs, 0), gs = parse_series("x1", vs, 0), hs = parse_series("x1^3", vs, 0);
    Series textbook = fs * p.apply({gs, hs}) - p.apply({fs * gs, hs}) + p.apply({fs, gs * hs}) -
                      p.apply({fs, gs}) * hs;
    CHECK(d.apply({fs, gs, hs}) == -textbook);
    // d^2 = 0 and [m,m] = 0
    CHECK(hochschild_d(d).is_zero());
    PolyDiffOp m = PolyDiffOp::product(vs, 0);
    CHECK(gerstenhaber(m, m).is_zero());
}

TEST_CASE("gerstenhaber identities on random operators") {
    VarSet vs{2, 0};
    Rng rng(77);
    for (int it = 0; it < 25; ++it) {
        PolyDiffOp a = random_op(rng, vs, rng.below(3));
        PolyDiffOp b = random_op(rng, vs, rng.below(3));
        PolyDiffOp c = random_op(rng, vs, rng.below(3));
        CHECK(hochschild_d(hochschild_d(a)).is_zero());
        // graded antisymmetry
        PolyDiffOp ab = gerstenhaber(a, b);
        PolyDiffOp ba = gerstenhaber(b, a);
        if ((a.degree() * b.degree()) % 2) CHECK(ab == ba);
        else CHECK(ab == -ba);
        // graded Jacobi, left Leibniz form
        PolyDiffOp lhs = gerstenhaber(a, gerstenhaber(b, c));
        PolyDiffOp rhs = gerstenhaber(gerstenhaber(a, b), c);
        PolyDiffOp cross = gerstenhaber(b, gerstenhaber(a, c));
        if ((a.degree() * b.degree()) % 2) rhs -= cross;
        else rhs += cross;
        CHECK(lhs == rhs);
    }
}

TEST_CASE("hkr antisymmetrization") {
    VarSet vs{2, 0};
    Multivector biv = mv(vs, 0, {{"1", {{1, 2}, {}}}});
    PolyDiffOp p = hkr(biv);
    Series f = parse_series("x1", vs, 0), g = parse_series("x2", vs, 0);
    CHECK(p.apply({f, g}) == parse_series("1/2", vs, 0));
    CHECK(p.apply({g, f}) == parse_series("-1/2", vs, 0));
    CHECK(hkr(mv(vs, 0, {{"x1*x2", {{}, {}}}})).apply({}) == parse_series("x1*x2", vs, 0));
    PolyDiffOp v = hkr(mv(vs, 0, {{"x2", {{1}, {}}}}));
    CHECK(v.apply({parse_series("x1", vs, 0)}) == parse_series("x2", vs, 0));
    CHECK_THROWS_AS(hkr(mv(VarSet{2, 1}, 0, {{"1", {{1}, {1}}}})), Error);
}

TEST_CASE("moyal product") {
    VarSet vs{2, 0};
    Multivector pi = mv(vs, 4, {{"h", {{1, 2}, {}}}});
    StarProduct s = moyal(pi);
    Series x1 = parse_series("x1", vs, 4), x2 = parse_series("x2", vs, 4);
    CHECK(s.star(x1, x2) == parse_series("x1*x2 + h/2", vs, 4));
    CHECK(s.star(x2, x1) == parse_series("x1*x2 - h/2", vs, 4));
    CHECK(s.commutator(x1, x2) == parse_series("h", vs, 4));
    // unitality
    Series one = series_one(vs, 4), f = parse_series("x1^3*x2 + x2^2", vs, 4);
    CHECK(s.star(one, f) == f);
    CHECK(s.star(f, one) == f);
    // associativity on all monomial triples of degree <= 3 at order 4
    auto mons = monomials(vs, 4, 3);
    for (const auto& a : mons)
        for (const auto& b : mons)
            for (const auto& cc : mons)
                CHECK((s.star(s.star(a, b), cc) - s.star(a, s.star(b, cc))).is_zero());
    // operator-level residual vanishes too
    CHECK(assoc_residual_op(s).is_zero());
    CHECK_THROWS_AS(moyal(mv(vs, 2, {{"h*x1", {{1, 2}, {}}}})), Error);
    CHECK_THROWS_AS(moyal(mv(vs, 2, {{"1", {{1, 2}, {}}}})), Error);
}

TEST_CASE("kontsevich2 star product") {
    VarSet vs{3, 0};
    // Heisenberg: pi = h x3 d1^d2
    Multivector pi = mv(vs, 2, {{"h*x3", {{1, 2}, {}}}});
    StarProduct s = kontsevich2(pi);
    Series x1 = parse_series("x1", vs, 2), x2 = parse_series("x2", vs, 2);
    CHECK(s.commutator(x1, x2) == parse_series("h*x3", vs, 2));
    // associativity mod h^3 on monomial triples of degree <= 2
    auto mons = monomials(vs, 2, 2);
    for (const auto& a : mons)
        for (const auto& b : mons)
            for (const auto& c : mons)
                CHECK((s.star(s.star(a, b), c) - s.star(a, s.star(b, c))).is_zero());
    // constant pi agrees with moyal at order 2 term by term
    VarSet vs2{2, 0};
    Multivector cpi = mv(vs2, 2, {{"h", {{1, 2}, {}}}});
    CHECK(kontsevich2(cpi).correction == moyal(cpi).correction);
    // star commutator reproduces the Poisson bracket at leading order on all
    // coordinate pairs
    auto mat = bivector_matrix(pi);
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
            Series xi = series_of(2, ScalarExpr::var(vs, vs.x(i)));
            Series xj = series_of(2, ScalarExpr::var(vs, vs.x(j)));
            CHECK(s.commutator(xi, xj) ==
                  mat[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)]);
        }
    // non-Poisson input is rejected
    CHECK_THROWS_AS(kontsevich2(mv(vs, 2, {{"h*x2", {{1, 2}, {}}}, {"h", {{2, 3}, {}}}})), Error);
}

TEST_CASE("sl2-type linear Poisson structure") {
    VarSet vs{3, 0};
    Multivector pi = mv(vs, 2, {{"h*x3", {{1, 2}, {}}}, {"-2*h*x1", {{1, 3}, {}}}, {"2*h*x2", {{2, 3}, {}}}});
    CHECK(schouten(pi, pi).is_zero());
    StarProduct s = kontsevich2(pi);
    auto mons = monomials(vs, 2, 2);
    for (const auto& a : mons)
        for (const auto& b : mons)
            for (const auto& c : mons)
                CHECK((s.star(s.star(a, b), c) - s.star(a, s.star(b, c))).is_zero());
}

TEST_CASE("corrupted correction fails associativity") {
    VarSet vs{2, 0};
    PolyDiffOp bad(vs, 2, 2);
    bad.add_term({XMulti::unit(2, 1), XMulti::unit(2, 1)}, parse_series("h", vs, 2));
    StarProduct s = StarProduct::make(bad);
    Series x1 = parse_series("x1", vs, 2);
    auto res = assoc_residual(s, {{{x1, x1, parse_series("x1^2", vs, 2)}}});
    CHECK_FALSE(res[0].is_zero());
    CHECK_FALSE(assoc_residual_op(s).is_zero());
}
