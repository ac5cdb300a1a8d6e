#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "dq/multivector.hpp"
#include "dq/polydiffop.hpp"

namespace dq {

/// Antisymmetrization embedding of multivector fields into polydifferential
/// operators: u1^...^up -> (1/p!) sum_perm sign(perm) u_perm(1) ox ... ox
/// u_perm(p). Functions and vector fields map to themselves.
inline PolyDiffOp hkr(const Multivector& a) {
    for (const auto& [w, c] : a.terms())
        if (w.q() != 0) throw Error("hkr: element has db legs");
    int p = -1;
    for (const auto& [w, c] : a.terms()) {
        if (p < 0) p = w.p();
        if (w.p() != p) throw Error("hkr: element is not homogeneous");
    }
    if (p < 0) p = 0;
    PolyDiffOp r(a.vars(), a.order(), p);
    Rational factorial(1);
    for (int i = 2; i <= p; ++i) factorial *= Rational(i);
    for (const auto& [w, c] : a.terms()) {
        std::vector<int> perm(w.dx.begin(), w.dx.end());
        std::sort(perm.begin(), perm.end());
        do {
            int sign = 1;
            for (std::size_t i = 0; i < perm.size(); ++i)
                for (std::size_t j = i + 1; j < perm.size(); ++j)
                    if (perm[i] > perm[j]) sign = -sign;
            PolyDiffOp::Key key;
            for (int leg : perm) key.push_back(XMulti::unit(a.vars().m, leg));
            Series coeff = c.scaled(Rational(sign) / factorial);
            r.add_term(std::move(key), coeff);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return r;
}

/// Star product m + correction: an associative formal deformation of the
/// pointwise product. The correction is an arity-2 operator that is O(hbar)
/// and annihilates constant arguments, so 1*f = f*1 = f exactly.
struct StarProduct {
    PolyDiffOp correction;  // arity 2

    static StarProduct make(PolyDiffOp corr) {
        if (corr.arity() != 2) throw Error("StarProduct: correction must be 2-ary");
        if (!corr.vanishes_below(1)) throw Error("StarProduct: correction must be O(hbar)");
        if (!corr.annihilates_constants()) throw Error("StarProduct: correction must annihilate constants");
        return StarProduct{std::move(corr)};
    }
    static StarProduct commutative(VarSet vs, int order) {
        return StarProduct{PolyDiffOp(vs, order, 2)};
    }

    const VarSet& vars() const { return correction.vars(); }
    int order() const { return correction.order(); }

    Series star(const Series& f, const Series& g) const {
        return f * g + correction.apply({f, g});
    }
    Series commutator(const Series& f, const Series& g) const {
        return star(f, g) - star(g, f);
    }
    /// m + correction as one operator.
    PolyDiffOp full_op() const {
        return PolyDiffOp::product(correction.vars(), correction.order()) + correction;
    }
};

/// Antisymmetric coefficient matrix pi^{ij} of a (2,0) bivector.
inline std::vector<std::vector<Series>> bivector_matrix(const Multivector& pi) {
    const VarSet& vs = pi.vars();
    std::vector<std::vector<Series>> mat(static_cast<std::size_t>(vs.m),
                                         std::vector<Series>(static_cast<std::size_t>(vs.m),
                                                             series_zero(vs, pi.order())));
    for (const auto& [w, c] : pi.terms()) {
        if (w.p() != 2 || w.q() != 0) throw Error("bivector_matrix: not a (2,0) element");
        std::size_t i = static_cast<std::size_t>(w.dx[0] - 1), j = static_cast<std::size_t>(w.dx[1] - 1);
        mat[i][j] += c;
        mat[j][i] -= c;
    }
    return mat;
}

/// Exponential star product of a constant-coefficient bivector, truncated at
/// the series order: f*g = sum_n (1/n!) (1/2^n) pi^{i1 j1}...pi^{in jn}
/// d_{i...}f d_{j...}g. Exactly associative mod h^{H+1}.
inline StarProduct moyal(const Multivector& pi) {
    const VarSet& vs = pi.vars();
    int order = pi.order();
    auto mat = bivector_matrix(pi);
    for (const auto& row : mat)
        for (const auto& c : row) {
            for (int i = 0; i <= order; ++i)
                if (!c.coeff(i).is_constant())
                    throw Error("moyal: bivector must have x- and b-independent coefficients");
            if (!c.vanishes_below(1)) throw Error("moyal: bivector must be O(hbar)");
        }

    PolyDiffOp corr(vs, order, 2);
    struct Piece { Series c; XMulti f, g; };
    std::vector<Piece> level;
    level.push_back({series_one(vs, order), XMulti(vs.m), XMulti(vs.m)});
    Rational nfact(1);
    for (int n = 1; n <= order; ++n) {
        std::vector<Piece> next;
        for (const auto& piece : level)
            for (int i = 0; i < vs.m; ++i)
                for (int j = 0; j < vs.m; ++j) {
                    if (mat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].is_zero()) continue;
                    Series c = piece.c * mat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].scaled(Rational(1, 2));
                    if (c.is_zero()) continue;
                    next.push_back({std::move(c), piece.f + XMulti::unit(vs.m, i + 1),
                                    piece.g + XMulti::unit(vs.m, j + 1)});
                }
        level = std::move(next);
        if (level.empty()) break;
        nfact *= Rational(n);
        for (const auto& piece : level)
            corr.add_term({piece.f, piece.g}, piece.c.scaled(nfact.inverse()));
    }
    return StarProduct::make(std::move(corr));
}

/// The explicit order <= 2 star product of a Poisson bivector:
///   f*g = fg + (1/2) pi^{ij} d_i f d_j g
///            + (1/8) pi^{ij} pi^{kl} d_i d_k f d_j d_l g
///            + (1/12) pi^{ij} d_j pi^{kl} (d_i d_k f d_l g - d_k f d_i d_l g),
/// truncated at the series order. Associative mod h^3 for Poisson pi, and to
/// all retained orders when the derivative terms and higher graph
/// contributions vanish.
inline StarProduct kontsevich2(const Multivector& pi) {
    const VarSet& vs = pi.vars();
    int order = pi.order();
    for (const auto& [w, c] : pi.terms()) {
        if (w.p() != 2 || w.q() != 0) throw Error("kontsevich2: not a (2,0) element");
        if (!c.vanishes_below(1)) throw Error("kontsevich2: bivector must be O(hbar)");
    }
    if (!schouten(pi, pi).is_zero())
        throw Error("kontsevich2: bivector is not Poisson mod h^{H+1}");

    auto mat = bivector_matrix(pi);
    auto at = [&](int i, int j) -> const Series& {
        return mat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    };
    PolyDiffOp corr(vs, order, 2);
    for (int i = 0; i < vs.m; ++i)
        for (int j = 0; j < vs.m; ++j) {
            if (at(i, j).is_zero()) continue;
            corr.add_term({XMulti::unit(vs.m, i + 1), XMulti::unit(vs.m, j + 1)},
                          at(i, j).scaled(Rational(1, 2)));
            for (int k = 0; k < vs.m; ++k)
                for (int l = 0; l < vs.m; ++l) {
                    if (!at(k, l).is_zero()) {
                        Series c2 = (at(i, j) * at(k, l)).scaled(Rational(1, 8));
                        corr.add_term({XMulti::unit(vs.m, i + 1) + XMulti::unit(vs.m, k + 1),
                                       XMulti::unit(vs.m, j + 1) + XMulti::unit(vs.m, l + 1)},
                                      c2);
                    }
                    Series dpi = at(k, l).derivative(vs.x(j + 1));
                    if (!dpi.is_zero()) {
                        Series c3 = (at(i, j) * dpi).scaled(Rational(1, 12));
                        corr.add_term({XMulti::unit(vs.m, i + 1) + XMulti::unit(vs.m, k + 1),
                                       XMulti::unit(vs.m, l + 1)},
                                      c3);
                        corr.add_term({XMulti::unit(vs.m, k + 1),
                                       XMulti::unit(vs.m, i + 1) + XMulti::unit(vs.m, l + 1)},
                                      -c3);
                    }
                }
        }
    return StarProduct::make(std::move(corr));
}

/// (f*g)*h - f*(g*h) for each supplied triple.
inline std::vector<Series> assoc_residual(const StarProduct& s,
                                          const std::vector<std::array<Series, 3>>& triples) {
    std::vector<Series> out;
    out.reserve(triples.size());
    for (const auto& t : triples)
        out.push_back(s.star(s.star(t[0], t[1]), t[2]) - s.star(t[0], s.star(t[1], t[2])));
    return out;
}

/// Operator-level associativity residual [m + tau0, m + tau0]/2.
inline PolyDiffOp assoc_residual_op(const StarProduct& s) {
    PolyDiffOp full = s.full_op();
    return gerstenhaber(full, full).scaled(Rational(1, 2));
}

}  // namespace dq
