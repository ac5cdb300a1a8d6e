#include <doctest.h>

#include "dq/family.hpp"
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

}  // namespace

TEST_CASE("operator form mirrors the multivector DGLA") {
    VarSet vs{2, 2};
    // d_B squares to zero
    OperatorForm f(vs, 1);
    f.add_term({1}, op1(vs, 1, 1, "h*b1*b2*x1"));
    f.add_term({}, PolyDiffOp::function(vs, 1, parse_series("b1^2*x2", vs, 1)));
    CHECK(f.d_B().d_B().is_zero());
    // m is a Maurer-Cartan element on its own
    OperatorForm m(vs, 1);
    m.add_term({}, PolyDiffOp::product(vs, 1));
    CHECK(bracket(m, m).is_zero());
    CHECK(m.d_B().is_zero());
}

TEST_CASE("mc4 on a Moyal family with scalar curvature potential") {
    // tau0 = moyal correction (b-independent), tau1 = 0, tau2 = g(b) db1 db2
    VarSet vs{2, 2};
    TightFamily t(vs, 2);
    t.tau0 = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}})).correction;
    t.tau2.emplace(std::make_pair(1, 2),
                   PolyDiffOp::function(vs, 2, parse_series("b1^2 + b2", vs, 2)));
    Mc4Report rep = mc4_check(t);
    CHECK(rep.ok());
}

TEST_CASE("mc4 flags a non-parallel connection") {
    // tau1 = db1 ox h d2 is parallel for Moyal, and so is db1 ox h x1 d2
    // (x1 d2 is the Hamiltonian vector field of x1^2/2, an inner derivation);
    // db1 ox h x2 d2 does not preserve pi and fails equation 2
    VarSet vs{2, 1};
    TightFamily good(vs, 2);
    good.tau0 = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}})).correction;
    good.tau1.emplace(1, op1(vs, 2, 2, "h"));
    CHECK(mc4_check(good).ok());
    TightFamily ham = good;
    ham.tau1[1] = op1(vs, 2, 2, "h*x1");
    CHECK(mc4_check(ham).ok());

    TightFamily bad = good;
    bad.tau1[1] = op1(vs, 2, 2, "h*x2");
    Mc4Report rep = mc4_check(bad);
    CHECK_FALSE(rep.ok());
    CHECK_FALSE(rep.zero[1]);  // second equation fails
    CHECK(rep.zero[0]);
    CHECK_FALSE(rep.residual[1].empty());
}

TEST_CASE("quantize a constant family with base 2-form") {
    VarSet vs{2, 2};
    Multivector sigma = mv(vs, 2, {{"h", {{1, 2}, {}}}, {"b1*b2", {{}, {1, 2}}}});
    TightFamily t = quantize_family(HamiltonianFamily::checked(sigma));
    CHECK(mc4_check(t).ok());
    CHECK(t.tau0 == moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}})).correction);
    CHECK(t.tau1.empty());
    CHECK(t.tau2_at(1, 2) == parse_series("b1*b2", vs, 2));
}

TEST_CASE("quantize seeds the connection via hkr") {
    VarSet vs{2, 1};
    Multivector sigma = mv(vs, 2, {{"h", {{1, 2}, {}}}, {"h", {{2}, {1}}}});
    TightFamily t = quantize_family(HamiltonianFamily::checked(sigma));
    CHECK(mc4_check(t).ok());
    CHECK(t.tau1.at(1) == op1(vs, 2, 2, "h"));
    CHECK(t.tau2.empty());
}

TEST_CASE("quantize completes a constant star product at order 3") {
    // at H = 3 the second-order correction is not associative mod h^4; the
    // corrector must supply the h^3 completion
    VarSet vs{2, 0};
    Multivector sigma = mv(vs, 3, {{"h", {{1, 2}, {}}}});
    TightFamily t = quantize_family(HamiltonianFamily::checked(sigma), CorrectorBounds{0, 3});
    CHECK(mc4_check(t).ok());
    StarProduct s = t.star();
    // the corrected product is associative mod h^4 on sample triples
    Series x1 = parse_series("x1", vs, 3), x2 = parse_series("x2", vs, 3);
    Series f = parse_series("x1^2*x2", vs, 3), g = parse_series("x1*x2^2", vs, 3);
    CHECK((s.star(s.star(x1, f), g) - s.star(x1, s.star(f, g))).is_zero());
    CHECK((s.star(s.star(f, g), x2) - s.star(f, s.star(g, x2))).is_zero());
    // determinism: a second run gives the identical family
    TightFamily t2 = quantize_family(HamiltonianFamily::checked(sigma), CorrectorBounds{0, 3});
    CHECK(t.tau0 == t2.tau0);
}

TEST_CASE("quantize handles the rational compensated family") {
    VarSet vs{2, 1};
    Multivector sigma = mv(vs, 2, {{"h", {{1, 2}, {}}}});
    Series c2 = series_zero(vs, 2);
    c2.coeff(2) = parse_scalar("1", vs) / parse_scalar("1 + b1", vs);
    Multivector pi2(vs, 2);
    pi2.add_term({{1, 2}, {}}, c2);
    Series q = series_zero(vs, 2);
    q.coeff(1) = parse_scalar("x1", vs) / parse_scalar("(1 + b1)^2", vs);
    Multivector phi(vs, 2);
    phi.add_term({{1}, {1}}, q);
    sigma += pi2;
    sigma += phi;
    TightFamily t = quantize_family(HamiltonianFamily::checked(sigma));
    CHECK(mc4_check(t).ok());
}

TEST_CASE("quantize rejects unmet preconditions") {
    VarSet vs{2, 1};
    // MC violation
    CHECK_THROWS_AS(HamiltonianFamily::checked(mv(vs, 1, {{"h*b1", {{1, 2}, {}}}})), Error);
    // degree violation (hbar^0 bivector)
    CHECK_THROWS_AS(HamiltonianFamily::checked(mv(vs, 1, {{"1", {{1, 2}, {}}}})), Error);
}

TEST_CASE("gauge family with inner generators") {
    // S = moyal on R^2, k = 2, generators ad(x1) db1 + ad(x2) db2:
    // ad(x1) = h d2, ad(x2) = -h d1, curvature vanishes, tau2 = 0
    VarSet vs{2, 2};
    StarProduct s = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}}));
    std::map<int, PolyDiffOp> gens;
    gens.emplace(1, op1(vs, 2, 2, "h"));
    gens.emplace(2, op1(vs, 2, 1, "-h"));
    TightFamily t = gauge_family(s, gens);
    CHECK(mc4_check(t).ok());
    CHECK(t.tau2.empty());

    // trivial generators give the trivial family
    TightFamily triv = gauge_family(s, {});
    CHECK(mc4_check(triv).ok());
    CHECK(triv.tau1.empty());

    // a non-parallel generator is rejected
    std::map<int, PolyDiffOp> bad;
    bad.emplace(1, op1(vs, 2, 2, "h*x2"));
    CHECK_THROWS_AS(gauge_family(s, bad), Error);
}

TEST_CASE("gauge family solves for a nonzero tau2") {
    // generators ad(x1^2) db1 = 2h x1 d2, ad(x2^2) db2 = -2h x2 d1:
    // [tau1,tau1]/2 = ad([x1^2,x2^2]) db1 db2 with [x1^2,x2^2] = 4h x1 x2,
    // so tau2 must come out as an inner potential
    VarSet vs{2, 2};
    StarProduct s = moyal(mv(vs, 2, {{"h", {{1, 2}, {}}}}));
    std::map<int, PolyDiffOp> gens;
    gens.emplace(1, op1(vs, 2, 2, "2*h*x1"));
    gens.emplace(2, op1(vs, 2, 1, "-2*h*x2"));
    TightFamily t = gauge_family(s, gens);
    CHECK(mc4_check(t).ok());
    REQUIRE(t.tau2.count(std::make_pair(1, 2)) == 1);
    Series v = t.tau2_at(1, 2);
    CHECK_FALSE(v.is_zero());
    CHECK(v.vanishes_below(1));  // x-dependence only at order >= 1
    CHECK(v.coeff(0).is_zero());
}

TEST_CASE("star commutator matches the hkr seed at leading order") {
    // (f*g - g*f)/h at order h^1 equals pi(df, dg)
    VarSet vs{3, 0};
    Multivector pi = mv(vs, 2, {{"h*x3", {{1, 2}, {}}}});
    TightFamily t = quantize_family(HamiltonianFamily::checked(pi));
    StarProduct s = t.star();
    Series x1 = parse_series("x1", vs, 2), x2 = parse_series("x2", vs, 2);
    Series comm = s.commutator(x1, x2);
    CHECK(comm.coeff(1) == parse_scalar("x3", vs));
}
