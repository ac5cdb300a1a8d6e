#include <doctest.h>

#include "dq/dirac.hpp"
#include "dq/parser.hpp"
#include "dq/random.hpp"

using namespace dq;

namespace {

GenSection section(VarSet vs, std::initializer_list<std::pair<int, const char*>> vec,
                   std::initializer_list<std::pair<int, const char*>> cov) {
    GenSection g(vs);
    for (const auto& [d, text] : vec) g.vec[static_cast<std::size_t>(d)] = parse_scalar(text, vs);
    for (const auto& [d, text] : cov) g.cov[static_cast<std::size_t>(d)] = parse_scalar(text, vs);
    return g;
}

Multivector mv(VarSet vs, int order, std::initializer_list<std::pair<const char*, WedgeWord>> terms) {
    Multivector a(vs, order);
    for (const auto& [text, w] : terms) a.add_term(w, parse_series(text, vs, order));
    return a;
}

}  // namespace

TEST_CASE("pairing examples") {
    VarSet vs{2, 0};
    CHECK(pairing(section(vs, {{0, "1"}}, {}), section(vs, {{1, "1"}}, {})).is_zero());
    CHECK(pairing(section(vs, {{0, "1"}}, {{1, "1"}}), section(vs, {{1, "1"}}, {{0, "1"}})) ==
          parse_scalar("2", vs));
    GenSection a = section(vs, {{0, "x1"}}, {{0, "1"}});
    CHECK(pairing(a, a) == parse_scalar("2*x1", vs));
}

TEST_CASE("courant bracket examples") {
    VarSet vs{3, 0};
    GenSection d1 = section(vs, {{0, "1"}}, {});
    GenSection x1d2 = section(vs, {{1, "x1"}}, {});
    GenSection br = courant(d1, x1d2);
    CHECK(br.vec[1] == parse_scalar("1", vs));
    CHECK(br.vec[0].is_zero());
    CHECK(br.cov[0].is_zero());

    CHECK(courant(section(vs, {}, {{0, "1"}}), section(vs, {}, {{1, "1"}})).is_zero());

    GenSection lie = courant(d1, section(vs, {}, {{1, "x1"}}));
    CHECK(lie.cov[1] == parse_scalar("1", vs));
    CHECK(lie.vec[0].is_zero());
    CHECK(lie.cov[0].is_zero());
}

TEST_CASE("bracket identity suite") {
    // left Leibniz and the self-bracket identity on seeded random sections
    Rng rng(20240001);
    int count = 0;
    for (VarSet vs : {VarSet{2, 1}, VarSet{1, 2}, VarSet{3, 1}, VarSet{2, 2}}) {
        for (int it = 0; it < 30; ++it) {
            GenSection a = rng.section(vs), b = rng.section(vs), c = rng.section(vs);
            GenSection lhs = courant(a, courant(b, c));
            GenSection rhs = courant(courant(a, b), c);
            GenSection cross = courant(b, courant(a, c));
            for (int d = 0; d < a.dirs(); ++d) {
                CHECK((lhs.vec[static_cast<std::size_t>(d)] - rhs.vec[static_cast<std::size_t>(d)] -
                       cross.vec[static_cast<std::size_t>(d)]).is_zero());
                CHECK((lhs.cov[static_cast<std::size_t>(d)] - rhs.cov[static_cast<std::size_t>(d)] -
                       cross.cov[static_cast<std::size_t>(d)]).is_zero());
            }
            GenSection self = courant(a, a);
            ScalarExpr half_norm = pairing(a, a).scaled(Rational(1, 2));
            for (int d = 0; d < a.dirs(); ++d) {
                CHECK(self.vec[static_cast<std::size_t>(d)].is_zero());
                CHECK(self.cov[static_cast<std::size_t>(d)] == half_norm.derivative(d));
            }
            ++count;
        }
    }
    CHECK(count >= 100);
}

TEST_CASE("is_dirac on frames") {
    VarSet vs{2, 0};
    // graph of the constant bivector d1^d2
    Multivector pi = mv(vs, 0, {{"1", {{1, 2}, {}}}});
    DiracFrame graph = sigma_to_graph(pi);
    CHECK(graph.sections[0].vec[1] == parse_scalar("1", vs));  // ledger's graph sign
    CHECK(graph.sections[1].vec[0] == parse_scalar("-1", vs));
    CHECK(is_dirac(graph).ok);

    // the tangent frame is Dirac
    DiracFrame tn(vs);
    tn.sections.push_back(section(vs, {{0, "1"}}, {}));
    tn.sections.push_back(section(vs, {{1, "1"}}, {}));
    CHECK(is_dirac(tn).ok);

    // non-Poisson bivector: pi = x2 d1^d2 + d2^d3 on R^3 (Jacobiator = 1)
    VarSet vs3{3, 0};
    Multivector bad = mv(vs3, 0, {{"x2", {{1, 2}, {}}}, {"1", {{2, 3}, {}}}});
    CHECK_FALSE(schouten(bad, bad).is_zero());  // oracle: [pi,pi] != 0
    DiracReport rep = is_dirac(sigma_to_graph(bad));
    CHECK_FALSE(rep.ok);
    CHECK_FALSE(rep.residual.empty());

    // degenerate frame is rejected
    DiracFrame degen(vs);
    degen.sections.push_back(section(vs, {{0, "x1"}}, {}));
    degen.sections.push_back(section(vs, {{1, "1"}}, {}));
    DiracReport drep = degen.validate();
    CHECK_FALSE(drep.ok);
    CHECK(drep.detail == "degenerate frame");
}

TEST_CASE("sigma_to_graph special shapes") {
    VarSet vs{2, 0};
    Multivector zero(vs, 0);
    DiracFrame f = sigma_to_graph(zero);
    CHECK(f.sections[0].cov[0] == parse_scalar("1", vs));
    CHECK(f.sections[0].vec[0].is_zero());
    CHECK(is_dirac(f).ok);

    // pure 2-form on the base factor (m = 0, k = 2)
    VarSet vsb{0, 2};
    Multivector om = mv(vsb, 0, {{"1", {{}, {1, 2}}}});
    DiracFrame g = sigma_to_graph(om);
    CHECK(g.sections[0].vec[0] == parse_scalar("1", vsb));
    CHECK(g.sections[0].cov[1] == parse_scalar("-1", vsb));  // omega enters negated
    CHECK(g.sections[1].cov[0] == parse_scalar("1", vsb));
    CHECK(is_dirac(g).ok);
}

TEST_CASE("lemma 1 equivalence, curated and random") {
    // curated MC solutions
    {
        VarSet vs{2, 2};
        CHECK(lemma1_equivalence(mv(vs, 1, {{"h", {{1, 2}, {}}}, {"b1*b2", {{}, {1, 2}}}})).agree());
        Lemma1Report r = lemma1_equivalence(mv(vs, 1, {{"h", {{1, 2}, {}}}, {"b1*b2", {{}, {1, 2}}}}));
        CHECK(r.mc_zero);
    }
    {
        // plain rational-function family: c(b1) d1^d2 - (x1/(1+b1)) d1 ox db1
        // with c = 1 + b1 satisfies MC exactly and its graph is Dirac
        VarSet vs{2, 1};
        Multivector sigma = mv(vs, 0, {{"1 + b1", {{1, 2}, {}}}});
        Multivector phi(vs, 0);
        phi.add_term({{1}, {1}}, series_of(0, parse_scalar("-x1", vs) / parse_scalar("1 + b1", vs)));
        sigma += phi;
        CHECK(mc_residual(sigma).is_zero());
        Lemma1Report r = lemma1_equivalence(sigma);
        CHECK(r.mc_zero);
        CHECK(r.dirac);
        // perturbing the compensation breaks both sides
        Multivector broken = sigma + mv(vs, 0, {{"x1", {{1}, {1}}}});
        Lemma1Report rb = lemma1_equivalence(broken);
        CHECK_FALSE(rb.mc_zero);
        CHECK_FALSE(rb.dirac);
        CHECK(rb.agree());
    }
    {
        // series compensated family: h(1 + h/(1+b1)) d1^d2 + h x1/(1+b1)^2 d1 ox db1
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
        CHECK(mc_residual(sigma).is_zero());
        Lemma1Report r = lemma1_equivalence(sigma);
        CHECK(r.mc_zero);
        CHECK(r.dirac);
        CHECK(lemma2_degree_check(sigma).ok);
    }
    {
        // linear Poisson structures are MC over a point
        VarSet vs{3, 0};
        CHECK(lemma1_equivalence(mv(vs, 1, {{"h*x3", {{1, 2}, {}}}})).agree());
        // at truncation order 2 the h^2 Jacobi obstruction survives
        Lemma1Report nonp = lemma1_equivalence(mv(vs, 2, {{"h*x2", {{1, 2}, {}}}, {"h", {{2, 3}, {}}}}));
        CHECK_FALSE(nonp.mc_zero);
        CHECK_FALSE(nonp.dirac);
    }
    {
        VarSet vs{2, 1};
        CHECK(lemma1_equivalence(Multivector(vs, 0)).agree());  // sigma = 0
        // derivation-type (1,1) family alone
        CHECK(lemma1_equivalence(mv(vs, 1, {{"h", {{2}, {1}}}})).agree());
    }
    // random degree-1 elements: both sides must always agree
    Rng rng(909);
    int disagreements = 0, nonsolutions = 0, solutions = 0;
    for (int it = 0; it < 40; ++it) {
        VarSet vs{2, rng.below(2) + 1};
        Multivector sigma(vs, 0);
        sigma += mv(vs, 0, {{"1", {{1, 2}, {}}}}).scaled(rng.rational());
        for (int n = 0; n < 2; ++n) {
            WedgeWord w{{1 + rng.below(vs.m)}, {1 + rng.below(vs.k)}};
            sigma.add_term(w, series_of(0, rng.scalar(vs, 2, 2)));
        }
        if (vs.k >= 2) sigma.add_term({{}, {1, 2}}, series_of(0, rng.scalar(vs, 2, 2)));
        Lemma1Report r = lemma1_equivalence(sigma);
        if (!r.agree()) ++disagreements;
        if (!r.mc_zero) ++nonsolutions;
        else ++solutions;
    }
    CHECK(disagreements == 0);
    CHECK(nonsolutions >= 20);
}

TEST_CASE("lemma 2 degree conditions") {
    VarSet vs{2, 2};
    CHECK(lemma2_degree_check(mv(vs, 1, {{"h", {{1, 2}, {}}}})).ok);
    Lemma2Report bad = lemma2_degree_check(mv(vs, 1, {{"1 + h", {{1, 2}, {}}}}));
    CHECK_FALSE(bad.ok);
    CHECK(bad.violation.find("hbar^0") != std::string::npos);
    Lemma2Report leaf = lemma2_degree_check(mv(vs, 1, {{"b1*x1", {{}, {1, 2}}}, {"h", {{1, 2}, {}}}}));
    CHECK(leaf.ok);
    CHECK(leaf.leaf_two_form.find("x1") != std::string::npos);
}
