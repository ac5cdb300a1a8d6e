#pragma once

#include <cctype>
#include <string>

#include "dq/hseries.hpp"

namespace dq {

struct ParseError : Error {
    int line;
    int column;
    ParseError(const std::string& what, int line_, int col_)
        : Error(what + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
          line(line_), column(col_) {}
};

/// Division helper for parsed expressions: divisor must either be h-free
/// (coefficient-wise division) or have an invertible constant term.
inline Series series_divide(const Series& a, const Series& b) {
    bool h_free = true;
    for (int i = 1; i <= b.order(); ++i)
        if (!b.coeff(i).is_zero()) { h_free = false; break; }
    if (h_free) {
        if (b.coeff(0).is_zero()) throw Error("division by zero");
        Series r = a;
        for (int i = 0; i <= r.order(); ++i) r.coeff(i) = r.coeff(i) / b.coeff(0);
        return r;
    }
    return a * b.inverted();
}

/// Recursive-descent parser for the scalar literal grammar: integers,
/// rationals p/q, variables x1.., b1.., t, s, u, h (the series variable),
/// operators + - * / ^ and parentheses; whitespace-insensitive.
class ExprParser {
public:
    ExprParser(std::string text, VarSet vs, int order)
        : text_(std::move(text)), vs_(vs), order_(order) {}

    Series parse() {
        Series v = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return v;
    }

private:
    std::string text_;
    VarSet vs_;
    int order_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        int line = 1, col = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
            if (text_[i] == '\n') { ++line; col = 1; }
            else ++col;
        }
        throw ParseError("parse error: " + msg, line, col);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Series parse_sum() {
        Series v = parse_product();
        while (true) {
            if (eat('+')) v += parse_product();
            else if (eat('-')) v -= parse_product();
            else return v;
        }
    }

    Series parse_product() {
        Series v = parse_power();
        while (true) {
            if (eat('*')) v *= parse_power();
            else if (eat('/')) v = series_divide(v, parse_power());
            else return v;
        }
    }

    Series parse_power() {
        if (eat('-')) return -parse_power();
        if (eat('+')) return parse_power();
        Series base = parse_atom();
        if (eat('^')) {
            skip_ws();
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ == start) fail("exponent must be a nonnegative integer");
            int e = std::stoi(text_.substr(start, pos_ - start));
            Series r = series_one(vs_, order_);
            for (int i = 0; i < e; ++i) r *= base;
            return r;
        }
        return base;
    }

    Series parse_atom() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            Series v = parse_sum();
            if (!eat(')')) fail("expected ')'");
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            BigInt n = BigInt::from_string(text_.substr(start, pos_ - start));
            return series_const(vs_, order_, Rational(std::move(n), BigInt(1)));
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            std::string name = text_.substr(start, pos_ - start);
            if (name == "h") {
                Series v = series_zero(vs_, order_);
                if (order_ >= 1) v.coeff(1) = ScalarExpr(vs_, Rational(1));
                return v;
            }
            if (name == "t") return series_of(order_, ScalarExpr::var(vs_, vs_.t()));
            if (name == "s") return series_of(order_, ScalarExpr::var(vs_, vs_.s()));
            if (name == "u") return series_of(order_, ScalarExpr::var(vs_, vs_.u()));
            if (name[0] == 'x' && name.size() > 1) {
                int i = std::stoi(name.substr(1));
                if (i < 1 || i > vs_.m) fail("variable " + name + " out of range (m=" + std::to_string(vs_.m) + ")");
                return series_of(order_, ScalarExpr::var(vs_, vs_.x(i)));
            }
            if (name[0] == 'b' && name.size() > 1) {
                int j = std::stoi(name.substr(1));
                if (j < 1 || j > vs_.k) fail("variable " + name + " out of range (k=" + std::to_string(vs_.k) + ")");
                return series_of(order_, ScalarExpr::var(vs_, vs_.b(j)));
            }
            fail("unknown identifier '" + name + "'");
        }
        fail("unexpected character");
    }
};

/// Parses a series-valued literal at the given truncation order.
inline Series parse_series(const std::string& text, VarSet vs, int order) {
    return ExprParser(text, vs, order).parse();
}

/// Parses an h-free scalar literal.
inline ScalarExpr parse_scalar(const std::string& text, VarSet vs) {
    Series v = ExprParser(text, vs, 1).parse();
    if (!v.coeff(1).is_zero()) throw Error("scalar literal must not contain h");
    return v.coeff(0);
}

}  // namespace dq
