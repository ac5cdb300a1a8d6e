#include <doctest.h>

#include "dq/holonomy.hpp"
#include "dq/parser.hpp"

using namespace dq;

namespace {

Multivector mv(VarSet vs, int order, std::initializer_list<std::pair<const char*, WedgeWord>> terms) {
    Multivector a(vs, order);
    for (const auto& [text, w] : terms) a.add_term(w, parse_series(text, vs, order));
    return a;
}

PolyDiffOp op1(VarSet vs, int order, int leg, const char* coeff) {
    PolyDiffOp p(vs, order, 1);
    p.add_term({XMulti::unit(vs.m, leg)}, parse_series(coeff, vs, order));
    return p;
}

PathB path(VarSet vs, std::initializer_list<const char*> comps) {
    std::vector<ScalarExpr> c;
    for (const char* text : comps) c.push_back(parse_scalar(text, vs));
    return PathB(vs, std::move(c));
}

PatchedDisk disk(VarSet vs, std::initializer_list<const char*> comps) {
    std::vector<ScalarExpr> c;
    for (const char* text : comps) c.push_back(parse_scalar(text, vs));
    return PatchedDisk::single(vs, std::move(c));
}

/// Moyal family on R^2 with tau1 = db1 ox h d2 over a 1-dimensional base.
TightFamily shift_family(int order = 2) {
    VarSet vs{2, 1};
    TightFamily t(vs, order);
    t.tau0 = moyal(mv(vs, order, {{"h", {{1, 2}, {}}}})).correction;
    t.tau1.emplace(1, op1(vs, order, 2, "h"));
    REQUIRE(mc4_check(t).ok());
    return t;
}

}  // namespace

TEST_CASE("trivial transport") {
    VarSet vs{2, 1};
    TightFamily t(vs, 2);
    t.tau0 = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}})).correction;
    PolyDiffOp tr = transport_op(t, path(vs, {"t"}));
    CHECK(tr == PolyDiffOp::identity(vs, 2));
}

TEST_CASE("shift scenario has the closed form x2 - h") {
    TightFamily t = shift_family(3);
    VarSet vs = t.vs;
    PathB gamma = path(vs, {"t"});
    PolyDiffOp tr = transport_op(t, gamma);
    // Dyson series = exp(-h d2): x2 -> x2 - h
    CHECK(tr.apply({parse_series("x2", vs, 3)}) == parse_series("x2 - h", vs, 3));
    CHECK(tr.apply({parse_series("x2^2", vs, 3)}) == parse_series("x2^2 - 2*h*x2 + h^2", vs, 3));
    // inverse path composes to the identity
    PolyDiffOp back = transport_op(t, gamma.reversed());
    CHECK(back.compose_at(0, tr) == PolyDiffOp::identity(vs, 3));
    // isomorphism property
    std::vector<std::pair<Series, Series>> pairs = {
        {parse_series("x1", vs, 3), parse_series("x2", vs, 3)},
        {parse_series("x1*x2", vs, 3), parse_series("x2^2", vs, 3)}};
    CHECK(transport_iso_check(t, gamma, pairs).ok);
}

TEST_CASE("transport functoriality and reparameterization invariance") {
    // b-dependent parallel generator: tau1 = db1 ox 2 h b1 x1 d2 is parallel
    // for Moyal (x1 d2 is inner), with nontrivial t-dependence along paths
    VarSet vs{2, 1};
    TightFamily t(vs, 2);
    t.tau0 = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}})).correction;
    t.tau1.emplace(1, op1(vs, 2, 2, "2*h*b1*x1"));
    REQUIRE(mc4_check(t).ok());
    PathB gamma = path(vs, {"t^2"});
    PolyDiffOp whole = transport_op(t, gamma);
    // subdivision at 1/3: T = T_[1/3,1] o T_[0,1/3]
    PolyDiffOp first = transport_op(t, gamma.subinterval(Rational(0), Rational(1, 3)));
    PolyDiffOp second = transport_op(t, gamma.subinterval(Rational(1, 3), Rational(1)));
    CHECK(second.compose_at(0, first) == whole);
    // orientation-preserving reparameterization fixing endpoints
    ScalarExpr tv = ScalarExpr::var(vs, vs.t());
    ScalarExpr phi = tv * tv * (ScalarExpr(vs, Rational(3)) - tv.scaled(Rational(2)));  // 3t^2-2t^3
    CHECK(transport_op(t, gamma.reparam(phi)) == whole);
    // inverse path
    CHECK(transport_op(t, gamma.reversed()).compose_at(0, whole) == PolyDiffOp::identity(vs, 2));
    // isomorphism property along the curved path
    std::vector<std::pair<Series, Series>> pairs = {
        {parse_series("x1", vs, 2), parse_series("x2", vs, 2)},
        {parse_series("x2", vs, 2), parse_series("x1*x2", vs, 2)}};
    CHECK(transport_iso_check(t, gamma, pairs).ok);
}

TEST_CASE("corrupted connection fails the isomorphism check") {
    VarSet vs{2, 1};
    TightFamily t(vs, 2);
    t.tau0 = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}})).correction;
    t.tau1.emplace(1, op1(vs, 2, 2, "h*x2"));  // not parallel
    CHECK_FALSE(mc4_check(t).ok());
    std::vector<std::pair<Series, Series>> pairs = {
        {parse_series("x1", vs, 2), parse_series("x2", vs, 2)}};
    IsoCheckReport rep = transport_iso_check(t, path(vs, {"t"}), pairs);
    CHECK_FALSE(rep.ok);
    CHECK_FALSE(rep.detail.empty());
}

TEST_CASE("abelian disk holonomy closed forms") {
    VarSet vs{2, 2};
    TightFamily t(vs, 2);
    t.tau0 = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}})).correction;
    SUBCASE("tau2 = 0") {
        HolonomyElement a = disk_holonomy(t, disk(vs, {"s", "u"}));
        CHECK(a.lambda == Rational(0));
        CHECK(a.unital == series_one(vs, 2));
    }
    SUBCASE("constant tau2 on the identity square: lambda = 1") {
        t.tau2.emplace(std::make_pair(1, 2), PolyDiffOp::function(vs, 2, series_one(vs, 2)));
        REQUIRE(mc4_check(t).ok());
        HolonomyElement a = disk_holonomy(t, disk(vs, {"s", "u"}));
        CHECK(a.lambda == Rational(1));
        CHECK(a.unital == series_one(vs, 2));
        CHECK(relation1_check(t, disk(vs, {"s", "u"}), {parse_series("x1*x2", vs, 2)}).ok);
    }
    SUBCASE("tau2 = b1 db1 db2: lambda = 1/2") {
        t.tau2.emplace(std::make_pair(1, 2),
                       PolyDiffOp::function(vs, 2, parse_series("b1", vs, 2)));
        REQUIRE(mc4_check(t).ok());
        HolonomyElement a = disk_holonomy(t, disk(vs, {"s", "u"}));
        CHECK(a.lambda == Rational(1, 2));
        CHECK(a.unital == series_one(vs, 2));
    }
}

TEST_CASE("inner-generator family satisfies relation 1") {
    // Moyal, tau1 = ad(x1^2) db1 + ad(x2^2) db2 = 2h x1 d2 db1 - 2h x2 d1 db2,
    // tau2 solved by gauge_family; boundary transports do not commute
    VarSet vs{2, 2};
    StarProduct s = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}}));
    std::map<int, PolyDiffOp> gens;
    gens.emplace(1, op1(vs, 2, 2, "2*h*x1"));
    gens.emplace(2, op1(vs, 2, 1, "-2*h*x2"));
    TightFamily t = gauge_family(s, gens);
    REQUIRE(mc4_check(t).ok());
    PatchedDisk d = disk(vs, {"s", "u"});
    std::vector<Series> funcs = {parse_series("x1", vs, 2), parse_series("x2", vs, 2),
                                 parse_series("x1*x2", vs, 2)};
    RelationReport rep = relation1_check(t, d, funcs);
    INFO(rep.detail);
    CHECK(rep.ok);
    // corrupting tau2 without re-solving breaks the relation
    TightFamily bad = t;
    bad.tau2[std::make_pair(1, 2)] +=
        PolyDiffOp::function(vs, 2, parse_series("h*x1", vs, 2));
    CHECK_FALSE(mc4_check(bad).ok());
    CHECK_FALSE(relation1_check(bad, d, funcs).ok);
}

TEST_CASE("relation 2: interior reparameterizations") {
    VarSet vs{2, 2};
    StarProduct s = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}}));
    std::map<int, PolyDiffOp> gens;
    gens.emplace(1, op1(vs, 2, 2, "2*h*x1"));
    gens.emplace(2, op1(vs, 2, 1, "-2*h*x2"));
    TightFamily t = gauge_family(s, gens);
    // add a scalar curvature term too (stays MC: it is central and closed)
    t.tau2[std::make_pair(1, 2)] += PolyDiffOp::function(vs, 2, parse_series("b1", vs, 2));
    REQUIRE(mc4_check(t).ok());
    PatchedDisk d = disk(vs, {"s", "u"});
    // s -> s^2 (boundary as a set unchanged, interior resped)
    CHECK(relation2_check(t, d, disk(vs, {"s^2", "u"})).ok);
    // u -> u^2(3-2u)
    CHECK(relation2_check(t, d, disk(vs, {"s", "u^2*(3-2*u)"})).ok);
    // a genuinely different disk is detected
    RelationReport diff = relation2_check(t, d, disk(vs, {"s", "u*(1+s-s^2)"}));
    // this one has a different boundary, so elements may differ; just make
    // sure the checker reports rather than crashes
    CHECK((diff.ok || !diff.detail.empty()));
}

TEST_CASE("relation 3: multiplicativity and naturality") {
    VarSet vs{2, 2};
    StarProduct s = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}}));
    std::map<int, PolyDiffOp> gens;
    gens.emplace(1, op1(vs, 2, 2, "2*h*x1"));
    gens.emplace(2, op1(vs, 2, 1, "-2*h*x2"));
    TightFamily t = gauge_family(s, gens);
    t.tau2[std::make_pair(1, 2)] += PolyDiffOp::function(vs, 2, parse_series("b2", vs, 2));
    REQUIRE(mc4_check(t).ok());
    // halves of the identity square: D1 = (s/2, u), D2 = ((1+s)/2, u)
    PatchedDisk d1 = disk(vs, {"s/2", "u"});
    PatchedDisk d2 = disk(vs, {"(1+s)/2", "u"});
    RelationReport rep = relation3_check(t, d1, d2);
    INFO(rep.detail);
    CHECK(rep.ok);
    // lambda additivity on the halves
    HolonomyElement whole = disk_holonomy(t, PatchedDisk::concat_s(d1, d2));
    HolonomyElement h1 = disk_holonomy(t, d1);
    HolonomyElement h2 = disk_holonomy(t, d2);
    CHECK(whole.lambda == h1.lambda + h2.lambda);
    // naturality under rotation of the base corner
    RelationReport nat = relation3_naturality_check(t, disk(vs, {"s", "u"}));
    INFO(nat.detail);
    CHECK(nat.ok);
}

TEST_CASE("piecewise disk equals its single-patch form") {
    VarSet vs{2, 2};
    StarProduct s = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}}));
    std::map<int, PolyDiffOp> gens;
    gens.emplace(1, op1(vs, 2, 2, "2*h*x1"));
    TightFamily t = gauge_family(s, gens);
    t.tau2.emplace(std::make_pair(1, 2),
                   PolyDiffOp::function(vs, 2, parse_series("b1*b2", vs, 2)));
    REQUIRE(mc4_check(t).ok());
    PatchedDisk whole = disk(vs, {"s", "u"});
    PatchedDisk glued = PatchedDisk::concat_s(disk(vs, {"s/2", "u"}), disk(vs, {"(1+s)/2", "u"}));
    CHECK(relation2_check(t, whole, glued).ok);
}

TEST_CASE("x-dependent classical curvature is rejected") {
    VarSet vs{2, 2};
    TightFamily t(vs, 1);
    t.tau0 = moyal(mv(vs, 1, {{"h", {{1, 2}, {}}}})).correction;
    t.tau2.emplace(std::make_pair(1, 2), PolyDiffOp::function(vs, 1, parse_series("x1", vs, 1)));
    CHECK_THROWS_AS(disk_holonomy(t, disk(vs, {"s", "u"})), Error);
}
