#pragma once

#include <string>
#include <vector>

#include "dq/linalg.hpp"
#include "dq/multivector.hpp"

namespace dq {

/// Section of (T + T*)N over the chart N = R^m x R^k. Directions are indexed
/// 0..m+k-1 in the canonical variable order (x-block then b-block).
struct GenSection {
    VarSet vs;
    std::vector<ScalarExpr> vec;  // coefficients of d/dx_i, d/db_j
    std::vector<ScalarExpr> cov;  // coefficients of dx_i, db_j

    explicit GenSection(VarSet v)
        : vs(v),
          vec(static_cast<std::size_t>(v.m + v.k), ScalarExpr(v)),
          cov(static_cast<std::size_t>(v.m + v.k), ScalarExpr(v)) {}

    int dirs() const { return vs.m + vs.k; }
    bool is_zero() const {
        for (const auto& c : vec) if (!c.is_zero()) return false;
        for (const auto& c : cov) if (!c.is_zero()) return false;
        return true;
    }
    friend GenSection operator-(const GenSection& a, const GenSection& b) {
        GenSection r = a;
        for (int d = 0; d < a.dirs(); ++d) {
            r.vec[static_cast<std::size_t>(d)] -= b.vec[static_cast<std::size_t>(d)];
            r.cov[static_cast<std::size_t>(d)] -= b.cov[static_cast<std::size_t>(d)];
        }
        return r;
    }
    std::string to_string() const {
        std::string out = "(";
        for (int d = 0; d < dirs(); ++d) {
            if (d) out += ", ";
            out += vec[static_cast<std::size_t>(d)].to_string();
        }
        out += " | ";
        for (int d = 0; d < dirs(); ++d) {
            if (d) out += ", ";
            out += cov[static_cast<std::size_t>(d)].to_string();
        }
        return out + ")";
    }
};

/// <(u,alpha),(v,beta)> = alpha(v) + beta(u).
inline ScalarExpr pairing(const GenSection& a, const GenSection& b) {
    if (a.vs != b.vs) throw Error("pairing: chart mismatch");
    ScalarExpr r(a.vs);
    for (int d = 0; d < a.dirs(); ++d) {
        r += a.cov[static_cast<std::size_t>(d)] * b.vec[static_cast<std::size_t>(d)];
        r += b.cov[static_cast<std::size_t>(d)] * a.vec[static_cast<std::size_t>(d)];
    }
    return r;
}

/// The bracket [[(u,alpha),(v,beta)]] = [u,v] + L_u beta - i_v d alpha,
/// computed in coordinates (Dorfman form, as printed).
inline GenSection courant(const GenSection& a, const GenSection& b) {
    if (a.vs != b.vs) throw Error("courant: chart mismatch");
    GenSection r(a.vs);
    int n = a.dirs();
    for (int d = 0; d < n; ++d) {
        ScalarExpr vec_d(a.vs), cov_d(a.vs);
        for (int e = 0; e < n; ++e) {
            const auto& ue = a.vec[static_cast<std::size_t>(e)];
            const auto& ve = b.vec[static_cast<std::size_t>(e)];
            // [u,v]^d = u^e d_e v^d - v^e d_e u^d
            vec_d += ue * b.vec[static_cast<std::size_t>(d)].derivative(e);
            vec_d -= ve * a.vec[static_cast<std::size_t>(d)].derivative(e);
            // (L_u beta)_d = u^e d_e beta_d + beta_e d_d u^e
            cov_d += ue * b.cov[static_cast<std::size_t>(d)].derivative(e);
            cov_d += b.cov[static_cast<std::size_t>(e)] * ue.derivative(d);
            // (i_v d alpha)_d = v^e (d_e alpha_d - d_d alpha_e)
            cov_d -= ve * (a.cov[static_cast<std::size_t>(d)].derivative(e) -
                           a.cov[static_cast<std::size_t>(e)].derivative(d));
        }
        r.vec[static_cast<std::size_t>(d)] = vec_d;
        r.cov[static_cast<std::size_t>(d)] = cov_d;
    }
    return r;
}

struct DiracReport {
    bool ok = true;
    std::string detail;          // empty when ok
    std::string residual;        // canonical text of the first failing residual
};

/// Frame of n = m + k sections claimed to span a maximal isotropic subbundle
/// over a domain box.
struct DiracFrame {
    VarSet vs;
    std::vector<GenSection> sections;
    Box box;

    explicit DiracFrame(VarSet v) : vs(v) {}

    /// Isotropy is checked symbolically, rank on the validation grid.
    DiracReport validate(int grid = 2) const {
        DiracReport rep;
        int n = vs.m + vs.k;
        if (static_cast<int>(sections.size()) != n) {
            rep.ok = false;
            rep.detail = "frame must have m+k sections";
            return rep;
        }
        for (std::size_t i = 0; i < sections.size(); ++i)
            for (std::size_t j = i; j < sections.size(); ++j) {
                ScalarExpr p = pairing(sections[i], sections[j]);
                if (!p.is_zero()) {
                    rep.ok = false;
                    rep.detail = "isotropy fails for sections " + std::to_string(i) + "," + std::to_string(j);
                    rep.residual = p.to_string();
                    return rep;
                }
            }
        // pointwise rank n on the grid
        std::vector<int> gvars;
        for (int v = 0; v < vs.m + vs.k; ++v) gvars.push_back(v);
        std::vector<int> idx(gvars.size(), 0);
        while (true) {
            std::map<int, Rational> pt;
            for (std::size_t i = 0; i < gvars.size(); ++i) {
                auto [lo, hi] = box.range(gvars[i]);
                pt[gvars[i]] = lo + (hi - lo) * Rational(idx[i], grid);
            }
            std::vector<std::vector<Rational>> mat(static_cast<std::size_t>(2 * n));
            for (auto& row : mat) row.assign(sections.size(), Rational(0));
            try {
                for (std::size_t c = 0; c < sections.size(); ++c)
                    for (int d = 0; d < n; ++d) {
                        mat[static_cast<std::size_t>(d)][c] = sections[c].vec[static_cast<std::size_t>(d)].eval(pt);
                        mat[static_cast<std::size_t>(n + d)][c] = sections[c].cov[static_cast<std::size_t>(d)].eval(pt);
                    }
            } catch (const Error&) {
                rep.ok = false;
                rep.detail = "degenerate frame: coefficient undefined on validation grid";
                return rep;
            }
            if (matrix_rank(mat, Rational(1)) != static_cast<std::size_t>(n)) {
                rep.ok = false;
                rep.detail = "degenerate frame";
                return rep;
            }
            std::size_t pos = 0;
            while (pos < idx.size() && ++idx[pos] > grid) { idx[pos] = 0; ++pos; }
            if (pos == idx.size()) break;
        }
        return rep;
    }
};

/// Closure under the Courant bracket, decided by exact linear algebra over
/// the coefficient fraction field. On failure the report carries the first
/// nonzero pairing of the bracket against the frame (for a maximal isotropic
/// frame, span membership is exactly orthogonality to the frame).
inline DiracReport is_dirac(const DiracFrame& f, int grid = 2) {
    DiracReport rep = f.validate(grid);
    if (!rep.ok) return rep;
    int n = f.vs.m + f.vs.k;
    for (std::size_t i = 0; i < f.sections.size(); ++i) {
        for (std::size_t j = i + 1; j < f.sections.size(); ++j) {
            GenSection br = courant(f.sections[i], f.sections[j]);
            std::vector<std::vector<ScalarExpr>> a(static_cast<std::size_t>(2 * n),
                                                   std::vector<ScalarExpr>(f.sections.size(), ScalarExpr(f.vs)));
            std::vector<ScalarExpr> rhs(static_cast<std::size_t>(2 * n), ScalarExpr(f.vs));
            for (std::size_t c = 0; c < f.sections.size(); ++c)
                for (int d = 0; d < n; ++d) {
                    a[static_cast<std::size_t>(d)][c] = f.sections[c].vec[static_cast<std::size_t>(d)];
                    a[static_cast<std::size_t>(n + d)][c] = f.sections[c].cov[static_cast<std::size_t>(d)];
                }
            for (int d = 0; d < n; ++d) {
                rhs[static_cast<std::size_t>(d)] = br.vec[static_cast<std::size_t>(d)];
                rhs[static_cast<std::size_t>(n + d)] = br.cov[static_cast<std::size_t>(d)];
            }
            if (!solve_scalar_field(a, rhs, f.vs)) {
                rep.ok = false;
                rep.detail = "bracket of sections " + std::to_string(i) + "," + std::to_string(j) +
                             " leaves the frame span";
                for (const auto& e : f.sections) {
                    ScalarExpr ortho = pairing(br, e);
                    if (!ortho.is_zero()) { rep.residual = ortho.to_string(); break; }
                }
                return rep;
            }
        }
    }
    return rep;
}

/// The graph frame of a degree-1 sigma: for each generator zeta of
/// T*M + TB, the section zeta + i_zeta (pi + phi - omega), where pi, phi,
/// omega are sigma's (2,0), (1,1), (0,2) components. The contraction signs
/// (including the relative minus on the form part) are the ledger's graph
/// convention: they are what makes the MC equation, with this library's
/// bracket and d conventions, agree exactly with Courant closure of the
/// frame. sigma must be hbar-free (order-0 coefficients); series values go
/// through the coefficient-wise check.
inline DiracFrame sigma_to_graph(const Multivector& sigma) {
    if (!sigma.has_degree(1)) throw Error("sigma_to_graph: element must have degree 1");
    const VarSet& vs = sigma.vars();
    DiracFrame f(vs);

    // contraction of a two-letter word with one generator; letters are
    // encoded as (is_db, index)
    struct Letter { bool is_db; int idx; };
    auto letters = [&](const WedgeWord& w) {
        std::vector<Letter> ls;
        for (int i : w.dx) ls.push_back({false, i});
        for (int j : w.db) ls.push_back({true, j});
        return ls;
    };

    auto contract = [&](bool gen_is_db, int gen_idx) {
        GenSection e(vs);
        if (!gen_is_db) e.cov[static_cast<std::size_t>(gen_idx - 1)] = ScalarExpr(vs, Rational(1));
        else e.vec[static_cast<std::size_t>(vs.m + gen_idx - 1)] = ScalarExpr(vs, Rational(1));
        for (const auto& [w, c] : sigma.terms()) {
            auto ls = letters(w);
            if (ls.size() != 2) throw Error("sigma_to_graph: non-quadratic term");
            for (std::size_t pos = 0; pos < 2; ++pos) {
                // dx_i pairs with a theta letter, d/db_j with a db letter
                if (ls[pos].is_db != gen_is_db || ls[pos].idx != gen_idx) continue;
                const Letter& rest = ls[1 - pos];
                ScalarExpr coeff = c.coeff(0);
                if (w.q() == 2) coeff = -coeff;  // graph sign: omega enters negated
                if (pos == 1) coeff = -coeff;    // derivation crossed the first letter
                if (!rest.is_db) e.vec[static_cast<std::size_t>(rest.idx - 1)] += coeff;
                else e.cov[static_cast<std::size_t>(vs.m + rest.idx - 1)] += coeff;
            }
        }
        return e;
    };

    for (int i = 1; i <= vs.m; ++i) f.sections.push_back(contract(false, i));
    for (int j = 1; j <= vs.k; ++j) f.sections.push_back(contract(true, j));

    for (std::size_t i = 0; i < f.sections.size(); ++i)
        for (std::size_t j = i; j < f.sections.size(); ++j)
            if (!pairing(f.sections[i], f.sections[j]).is_zero())
                throw Error("sigma_to_graph: graph is not isotropic (convention error)");
    return f;
}

/// Section of (T + T*)N with hbar-series coefficients, for coefficient-wise
/// closure checks of formal families.
struct FormalSection {
    VarSet vs;
    std::vector<Series> vec, cov;

    FormalSection(VarSet v, int order)
        : vs(v),
          vec(static_cast<std::size_t>(v.m + v.k), series_zero(v, order)),
          cov(static_cast<std::size_t>(v.m + v.k), series_zero(v, order)) {}
    int dirs() const { return vs.m + vs.k; }
};

inline Series pairing(const FormalSection& a, const FormalSection& b) {
    Series r = a.vec[0] - a.vec[0];
    for (int d = 0; d < a.dirs(); ++d) {
        r += a.cov[static_cast<std::size_t>(d)] * b.vec[static_cast<std::size_t>(d)];
        r += b.cov[static_cast<std::size_t>(d)] * a.vec[static_cast<std::size_t>(d)];
    }
    return r;
}

inline FormalSection courant(const FormalSection& a, const FormalSection& b) {
    FormalSection r(a.vs, a.vec[0].order());
    int n = a.dirs();
    for (int d = 0; d < n; ++d) {
        Series vec_d = r.vec[static_cast<std::size_t>(d)], cov_d = vec_d;
        for (int e = 0; e < n; ++e) {
            const auto& ue = a.vec[static_cast<std::size_t>(e)];
            const auto& ve = b.vec[static_cast<std::size_t>(e)];
            vec_d += ue * b.vec[static_cast<std::size_t>(d)].derivative(e);
            vec_d -= ve * a.vec[static_cast<std::size_t>(d)].derivative(e);
            cov_d += ue * b.cov[static_cast<std::size_t>(d)].derivative(e);
            cov_d += b.cov[static_cast<std::size_t>(e)] * ue.derivative(d);
            cov_d -= ve * (a.cov[static_cast<std::size_t>(d)].derivative(e) -
                           a.cov[static_cast<std::size_t>(e)].derivative(d));
        }
        r.vec[static_cast<std::size_t>(d)] = vec_d;
        r.cov[static_cast<std::size_t>(d)] = cov_d;
    }
    return r;
}

/// Graph frame with series coefficients (same contraction and graph sign as
/// sigma_to_graph).
inline std::vector<FormalSection> sigma_to_graph_formal(const Multivector& sigma) {
    if (!sigma.has_degree(1)) throw Error("sigma_to_graph: element must have degree 1");
    const VarSet& vs = sigma.vars();
    int order = sigma.order();
    std::vector<FormalSection> frame;
    auto contract = [&](bool gen_is_db, int gen_idx) {
        FormalSection e(vs, order);
        if (!gen_is_db) e.cov[static_cast<std::size_t>(gen_idx - 1)] = series_one(vs, order);
        else e.vec[static_cast<std::size_t>(vs.m + gen_idx - 1)] = series_one(vs, order);
        for (const auto& [w, c] : sigma.terms()) {
            struct Letter { bool is_db; int idx; };
            std::vector<Letter> ls;
            for (int i : w.dx) ls.push_back({false, i});
            for (int j : w.db) ls.push_back({true, j});
            if (ls.size() != 2) throw Error("sigma_to_graph: non-quadratic term");
            for (std::size_t pos = 0; pos < 2; ++pos) {
                if (ls[pos].is_db != gen_is_db || ls[pos].idx != gen_idx) continue;
                const Letter& rest = ls[1 - pos];
                Series coeff = c;
                if (w.q() == 2) coeff = -coeff;  // graph sign: omega enters negated
                if (pos == 1) coeff = -coeff;
                if (!rest.is_db) e.vec[static_cast<std::size_t>(rest.idx - 1)] += coeff;
                else e.cov[static_cast<std::size_t>(vs.m + rest.idx - 1)] += coeff;
            }
        }
        return e;
    };
    for (int i = 1; i <= vs.m; ++i) frame.push_back(contract(false, i));
    for (int j = 1; j <= vs.k; ++j) frame.push_back(contract(true, j));
    return frame;
}

/// Closure of the formal graph frame, coefficient-wise in hbar. The frame of
/// a graph is maximal isotropic with invertible leading part, so membership
/// of a bracket in the span mod h^{H+1} is exactly orthogonality to the
/// frame; the check below computes those pairings in series arithmetic.
inline DiracReport is_dirac_formal(const std::vector<FormalSection>& frame) {
    DiracReport rep;
    for (std::size_t i = 0; i < frame.size(); ++i)
        for (std::size_t j = i; j < frame.size(); ++j) {
            Series p = pairing(frame[i], frame[j]);
            if (!p.is_zero()) {
                rep.ok = false;
                rep.detail = "formal frame not isotropic";
                rep.residual = p.to_string();
                return rep;
            }
        }
    for (std::size_t i = 0; i < frame.size(); ++i)
        for (std::size_t j = i + 1; j < frame.size(); ++j) {
            FormalSection br = courant(frame[i], frame[j]);
            for (std::size_t l = 0; l < frame.size(); ++l) {
                Series ortho = pairing(br, frame[l]);
                if (!ortho.is_zero()) {
                    rep.ok = false;
                    rep.detail = "bracket of sections " + std::to_string(i) + "," + std::to_string(j) +
                                 " leaves the formal span";
                    rep.residual = ortho.to_string();
                    return rep;
                }
            }
        }
    return rep;
}

struct Lemma1Report {
    bool mc_zero = false;
    bool dirac = false;
    bool agree() const { return mc_zero == dirac; }
    std::string detail;
};

/// Checks the equivalence "MC solution <=> graph is Dirac" on one sigma.
/// Plain (order-0) values use the span-based is_dirac; series values use the
/// coefficient-wise formal closure, which is the mod-h^{H+1} statement.
inline Lemma1Report lemma1_equivalence(const Multivector& sigma, int grid = 2) {
    Lemma1Report rep;
    rep.mc_zero = mc_residual(sigma).is_zero();
    if (sigma.order() == 0) {
        DiracReport d = is_dirac(sigma_to_graph(sigma), grid);
        rep.dirac = d.ok;
        if (!d.ok) rep.detail = d.detail + (d.residual.empty() ? "" : " residual " + d.residual);
    } else {
        DiracReport d = is_dirac_formal(sigma_to_graph_formal(sigma));
        rep.dirac = d.ok;
        if (!d.ok) rep.detail = d.detail + (d.residual.empty() ? "" : " residual " + d.residual);
    }
    return rep;
}

struct Lemma2Report {
    bool ok = true;
    std::string violation;
    std::string leaf_two_form;  // canonical text of the hbar^0 (0,2) part
};

/// Degree conditions of the formal-family lemma: the (2,0) and (1,1) parts
/// vanish at hbar = 0; what survives at hbar = 0 is the leafwise 2-form.
inline Lemma2Report lemma2_degree_check(const Multivector& sigma) {
    Lemma2Report rep;
    for (const auto& [w, c] : sigma.terms()) {
        bool needs_hbar = (w.p() == 2 && w.q() == 0) || (w.p() == 1 && w.q() == 1);
        if (needs_hbar && !c.coeff(0).is_zero()) {
            rep.ok = false;
            rep.violation = "term with dx-degree " + std::to_string(w.p()) +
                            " has nonzero hbar^0 coefficient " + c.coeff(0).to_string();
            return rep;
        }
        if (w.p() != 0 && w.p() != 1 && w.p() != 2)
            { rep.ok = false; rep.violation = "term outside bidegrees (2,0),(1,1),(0,2)"; return rep; }
    }
    rep.leaf_two_form = sigma.component(0, 2).coefficient_at(0).to_string();
    return rep;
}

/// Maurer-Cartan solution in the hbar-weighted algebra: a formal family of
/// Poisson structures on M parametrized by B.
struct HamiltonianFamily {
    Multivector sigma;

    /// Validates the degree constraints and the MC equation.
    static HamiltonianFamily checked(const Multivector& sigma) {
        if (!sigma.has_degree(1)) throw Error("HamiltonianFamily: sigma must have degree 1");
        Lemma2Report l2 = lemma2_degree_check(sigma);
        if (!l2.ok) throw Error("HamiltonianFamily: " + l2.violation);
        Multivector res = mc_residual(sigma);
        if (!res.is_zero())
            throw Error("HamiltonianFamily: MC residual nonzero: " + res.to_string());
        return HamiltonianFamily{sigma};
    }
};

}  // namespace dq
