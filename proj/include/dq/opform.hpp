#pragma once

#include <map>
#include <utility>
#include <vector>

#include "dq/polydiffop.hpp"

namespace dq {

/// Omega(B)-form with polydifferential-operator values: the ambient space of
/// m + tau0 + tau1 + tau2. Terms are keyed by (db-word, arity) so
/// inhomogeneous sums are fine; the structure mirrors the multivector side
/// with arity - 1 in place of p - 1:
///   [P ox al, Q ox be] = (-1)^{|al| (arity Q - 1)} [P,Q] ox al ^ be,
///   d(P ox al) = (-1)^{arity P} sum_j (dP/db_j) ox db_j ^ al.
class OperatorForm {
public:
    using Key = std::pair<std::vector<int>, int>;  // (db-word, arity)
    using Terms = std::map<Key, PolyDiffOp>;

    OperatorForm() = default;
    OperatorForm(VarSet vs, int order) : vs_(vs), order_(order) {}

    static OperatorForm wrap(const PolyDiffOp& op, std::vector<int> db_word = {}) {
        OperatorForm r(op.vars(), op.order());
        r.add_term(std::move(db_word), op);
        return r;
    }

    const VarSet& vars() const { return vs_; }
    int order() const { return order_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Adds op tensor db-word; the word need not be sorted (signs absorbed).
    void add_term(std::vector<int> word, const PolyDiffOp& op) {
        if (op.is_zero()) return;
        int sign = 1;
        for (std::size_t i = 1; i < word.size(); ++i)
            for (std::size_t j = i; j > 0 && word[j] < word[j - 1]; --j) {
                std::swap(word[j], word[j - 1]);
                sign = -sign;
            }
        for (std::size_t i = 1; i < word.size(); ++i)
            if (word[i] == word[i - 1]) return;
        Key key{std::move(word), op.arity()};
        PolyDiffOp v = sign < 0 ? -op : op;
        auto it = terms_.find(key);
        if (it == terms_.end()) terms_.emplace(std::move(key), std::move(v));
        else {
            it->second += v;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    friend OperatorForm operator+(const OperatorForm& a, const OperatorForm& b) {
        a.compat(b);
        OperatorForm r = a;
        for (const auto& [k, op] : b.terms_) r.add_term(k.first, op);
        return r;
    }
    friend OperatorForm operator-(const OperatorForm& a, const OperatorForm& b) {
        a.compat(b);
        OperatorForm r = a;
        for (const auto& [k, op] : b.terms_) r.add_term(k.first, -op);
        return r;
    }
    OperatorForm operator-() const {
        OperatorForm r = *this;
        for (auto& [k, op] : r.terms_) op = -op;
        return r;
    }
    OperatorForm& operator+=(const OperatorForm& o) { *this = *this + o; return *this; }
    OperatorForm& operator-=(const OperatorForm& o) { *this = *this - o; return *this; }
    OperatorForm scaled(const Rational& c) const {
        OperatorForm r = *this;
        for (auto& [k, op] : r.terms_) op = op.scaled(c);
        return r;
    }

    friend bool operator==(const OperatorForm& a, const OperatorForm& b) {
        return a.vs_ == b.vs_ && a.order_ == b.order_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const OperatorForm& a, const OperatorForm& b) { return !(a == b); }

    /// Component of form degree q and operator arity r.
    OperatorForm component(int q, int r) const {
        OperatorForm out(vs_, order_);
        for (const auto& [k, op] : terms_)
            if (static_cast<int>(k.first.size()) == q && k.second == r) out.terms_.emplace(k, op);
        return out;
    }

    OperatorForm d_B() const {
        OperatorForm r(vs_, order_);
        for (const auto& [k, op] : terms_) {
            int sgn = k.second % 2 ? -1 : 1;  // (-1)^{arity}
            for (int j = 1; j <= vs_.k; ++j) {
                PolyDiffOp dop = op.map_coeffs([&](const Series& c) { return c.derivative(vs_.b(j)); });
                if (dop.is_zero()) continue;
                std::vector<int> word;
                word.push_back(j);
                word.insert(word.end(), k.first.begin(), k.first.end());
                r.add_term(std::move(word), sgn < 0 ? -dop : dop);
            }
        }
        return r;
    }

    friend OperatorForm bracket(const OperatorForm& a, const OperatorForm& b) {
        a.compat(b);
        OperatorForm r(a.vs_, a.order_);
        for (const auto& [ka, pa] : a.terms_) {
            for (const auto& [kb, pb] : b.terms_) {
                int tensor = (static_cast<int>(ka.first.size()) * (kb.second - 1)) % 2 ? -1 : 1;
                PolyDiffOp br = gerstenhaber(pa, pb);
                if (br.is_zero()) continue;
                std::vector<int> word = ka.first;
                word.insert(word.end(), kb.first.begin(), kb.first.end());
                r.add_term(std::move(word), tensor < 0 ? -br : br);
            }
        }
        return r;
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string out;
        for (const auto& [k, op] : terms_) {
            if (!out.empty()) out += "\n+ ";
            out += "[" + op.to_string() + "]";
            for (int j : k.first) out += " db" + std::to_string(j);
        }
        return out;
    }

private:
    VarSet vs_;
    int order_ = 0;
    Terms terms_;

    void compat(const OperatorForm& o) const {
        if (vs_ != o.vs_ || order_ != o.order_)
            throw Error("OperatorForm: incompatible chart or truncation order");
    }
};

}  // namespace dq
