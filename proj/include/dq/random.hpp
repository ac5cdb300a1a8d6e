#pragma once

#include <cstdint>

#include "dq/dirac.hpp"

namespace dq {

/// Deterministic generator for the property suites (splitmix64). The same
/// seed always produces the same case stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

    /// Small rational with numerator in [-max_num, max_num], denominator in [1, max_den].
    Rational rational(int max_num = 3, int max_den = 2) {
        int n = below(2 * max_num + 1) - max_num;
        int d = 1 + below(max_den);
        return Rational(n, d);
    }

    /// Sparse polynomial in the x/b variables with bounded degree.
    Poly poly(VarSet vs, int max_degree = 2, int terms = 3) {
        Poly p(vs);
        int nv = vs.m + vs.k;
        for (int i = 0; i < terms; ++i) {
            Monomial mo(vs.nvars());
            int deg = below(max_degree + 1);
            for (int d = 0; d < deg && nv > 0; ++d) {
                int v = below(nv);
                mo.e[static_cast<std::size_t>(v)] = static_cast<std::uint16_t>(mo.e[static_cast<std::size_t>(v)] + 1);
            }
            p.add_term(mo, rational());
        }
        return p;
    }
    ScalarExpr scalar(VarSet vs, int max_degree = 2, int terms = 3) {
        return ScalarExpr(poly(vs, max_degree, terms));
    }

    GenSection section(VarSet vs, int max_degree = 2) {
        GenSection g(vs);
        for (int d = 0; d < g.dirs(); ++d) {
            g.vec[static_cast<std::size_t>(d)] = scalar(vs, max_degree, 2);
            g.cov[static_cast<std::size_t>(d)] = scalar(vs, max_degree, 2);
        }
        return g;
    }

    /// Random mixed multivector with every term of dx-degree <= pmax and
    /// db-degree <= qmax.
    Multivector multivector(VarSet vs, int order, int pmax, int qmax, int terms = 4, int max_degree = 2) {
        Multivector a(vs, order);
        for (int i = 0; i < terms; ++i) {
            WedgeWord w;
            int p = below(pmax + 1), q = below(qmax + 1);
            for (int j = 0; j < p && vs.m > 0; ++j) w.dx.push_back(1 + below(vs.m));
            for (int j = 0; j < q && vs.k > 0; ++j) w.db.push_back(1 + below(vs.k));
            Series c = series_zero(vs, order);
            for (int o = 0; o <= order; ++o) c.coeff(o) = scalar(vs, max_degree, 2);
            a.add_term(w, c);
        }
        return a;
    }

private:
    std::uint64_t state_;
};

}  // namespace dq
