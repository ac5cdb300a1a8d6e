#pragma once

#include <optional>
#include <vector>

#include "dq/scalar.hpp"

namespace dq {

/// Exact reduced-row-echelon solve of A x = rhs over a field type F (Rational
/// or ScalarExpr). Columns are eliminated left to right with the first
/// nonzero pivot row, and free variables are set to zero, so the solution
/// selection is deterministic: support is concentrated on the earliest
/// possible columns in the given order.
template <class F>
std::optional<std::vector<F>> solve_linear(std::vector<std::vector<F>> a, std::vector<F> rhs,
                                           const F& zero, const F& one) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    if (rhs.size() != rows) throw Error("solve_linear: shape mismatch");

    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t pr = r;
        while (pr < rows && a[pr][c].is_zero()) ++pr;
        if (pr == rows) continue;
        std::swap(a[pr], a[r]);
        std::swap(rhs[pr], rhs[r]);
        F inv = one / a[r][c];
        for (std::size_t j = c; j < cols; ++j) a[r][j] = a[r][j] * inv;
        rhs[r] = rhs[r] * inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || a[i][c].is_zero()) continue;
            F f = a[i][c];
            for (std::size_t j = c; j < cols; ++j) a[i][j] = a[i][j] - f * a[r][j];
            rhs[i] = rhs[i] - f * rhs[r];
        }
        pivot_col.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < rows; ++i)
        if (!rhs[i].is_zero()) return std::nullopt;

    std::vector<F> x(cols, zero);
    for (std::size_t i = 0; i < pivot_col.size(); ++i) x[pivot_col[i]] = rhs[i];
    return x;
}

inline std::optional<std::vector<Rational>> solve_rational(std::vector<std::vector<Rational>> a,
                                                           std::vector<Rational> rhs) {
    return solve_linear(std::move(a), std::move(rhs), Rational(0), Rational(1));
}

inline std::optional<std::vector<ScalarExpr>> solve_scalar_field(std::vector<std::vector<ScalarExpr>> a,
                                                                 std::vector<ScalarExpr> rhs, VarSet vs) {
    return solve_linear(std::move(a), std::move(rhs), ScalarExpr(vs), ScalarExpr(vs, Rational(1)));
}

template <class F>
std::size_t matrix_rank(std::vector<std::vector<F>> a, const F& one) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t pr = r;
        while (pr < rows && a[pr][c].is_zero()) ++pr;
        if (pr == rows) continue;
        std::swap(a[pr], a[r]);
        F inv = one / a[r][c];
        for (std::size_t j = c; j < cols; ++j) a[r][j] = a[r][j] * inv;
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (a[i][c].is_zero()) continue;
            F f = a[i][c];
            for (std::size_t j = c; j < cols; ++j) a[i][j] = a[i][j] - f * a[r][j];
        }
        ++r;
    }
    return r;
}

}  // namespace dq
