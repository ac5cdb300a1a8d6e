#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace dq {

/// Arbitrary-precision signed integer, sign-magnitude with base-1e9 limbs.
/// Small and deterministic; all higher layers sit on top of this.
class BigInt {
public:
    static constexpr std::uint32_t kBase = 1000000000u;

    BigInt() : sign_(0) {}
    BigInt(long long v) {
        if (v == 0) { sign_ = 0; return; }
        sign_ = v > 0 ? 1 : -1;
        unsigned long long a = v > 0 ? static_cast<unsigned long long>(v)
                                     : 0ULL - static_cast<unsigned long long>(v);
        while (a) { limbs_.push_back(static_cast<std::uint32_t>(a % kBase)); a /= kBase; }
    }

    static BigInt from_string(const std::string& s) {
        std::size_t i = 0;
        int sgn = 1;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) { sgn = s[i] == '-' ? -1 : 1; ++i; }
        if (i == s.size()) throw std::invalid_argument("BigInt: empty literal");
        BigInt r;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("BigInt: bad digit");
            r.mul_small(10);
            r.add_small(static_cast<std::uint32_t>(s[i] - '0'));
        }
        if (!r.limbs_.empty()) r.sign_ = sgn;
        return r;
    }

    bool is_zero() const { return sign_ == 0; }
    int sign() const { return sign_; }
    bool is_one() const { return sign_ == 1 && limbs_.size() == 1 && limbs_[0] == 1; }

    BigInt operator-() const { BigInt r = *this; r.sign_ = -r.sign_; return r; }
    BigInt abs() const { BigInt r = *this; if (r.sign_ < 0) r.sign_ = 1; return r; }

    friend bool operator==(const BigInt& a, const BigInt& b) {
        return a.sign_ == b.sign_ && a.limbs_ == b.limbs_;
    }
    friend bool operator!=(const BigInt& a, const BigInt& b) { return !(a == b); }
    friend bool operator<(const BigInt& a, const BigInt& b) {
        if (a.sign_ != b.sign_) return a.sign_ < b.sign_;
        int c = cmp_mag(a.limbs_, b.limbs_);
        return a.sign_ >= 0 ? c < 0 : c > 0;
    }
    friend bool operator>(const BigInt& a, const BigInt& b) { return b < a; }
    friend bool operator<=(const BigInt& a, const BigInt& b) { return !(b < a); }
    friend bool operator>=(const BigInt& a, const BigInt& b) { return !(a < b); }

    friend BigInt operator+(const BigInt& a, const BigInt& b) {
        if (a.sign_ == 0) return b;
        if (b.sign_ == 0) return a;
        BigInt r;
        if (a.sign_ == b.sign_) {
            r.limbs_ = add_mag(a.limbs_, b.limbs_);
            r.sign_ = a.sign_;
        } else {
            int c = cmp_mag(a.limbs_, b.limbs_);
            if (c == 0) return BigInt();
            if (c > 0) { r.limbs_ = sub_mag(a.limbs_, b.limbs_); r.sign_ = a.sign_; }
            else       { r.limbs_ = sub_mag(b.limbs_, a.limbs_); r.sign_ = b.sign_; }
        }
        return r;
    }
    friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

    friend BigInt operator*(const BigInt& a, const BigInt& b) {
        if (a.sign_ == 0 || b.sign_ == 0) return BigInt();
        BigInt r;
        r.limbs_.assign(a.limbs_.size() + b.limbs_.size(), 0);
        for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
            std::uint64_t carry = 0;
            for (std::size_t j = 0; j < b.limbs_.size(); ++j) {
                std::uint64_t cur = static_cast<std::uint64_t>(a.limbs_[i]) * b.limbs_[j]
                                  + r.limbs_[i + j] + carry;
                r.limbs_[i + j] = static_cast<std::uint32_t>(cur % kBase);
                carry = cur / kBase;
            }
            std::size_t j = b.limbs_.size();
            while (carry) {
                std::uint64_t cur = r.limbs_[i + j] + carry;
                r.limbs_[i + j] = static_cast<std::uint32_t>(cur % kBase);
                carry = cur / kBase;
                ++j;
            }
        }
        r.trim();
        r.sign_ = a.sign_ * b.sign_;
        return r;
    }

    /// Truncated division (round toward zero); remainder has the dividend's sign.
    static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
        if (b.sign_ == 0) throw std::domain_error("BigInt: division by zero");
        if (cmp_mag(a.limbs_, b.limbs_) < 0) { q = BigInt(); r = a; return; }
        std::vector<std::uint32_t> qm, rm;
        divmod_mag(a.limbs_, b.limbs_, qm, rm);
        q.limbs_ = std::move(qm); q.trim();
        r.limbs_ = std::move(rm); r.trim();
        q.sign_ = q.limbs_.empty() ? 0 : a.sign_ * b.sign_;
        r.sign_ = r.limbs_.empty() ? 0 : a.sign_;
    }
    friend BigInt operator/(const BigInt& a, const BigInt& b) { BigInt q, r; divmod(a, b, q, r); return q; }
    friend BigInt operator%(const BigInt& a, const BigInt& b) { BigInt q, r; divmod(a, b, q, r); return r; }

    BigInt& operator+=(const BigInt& o) { *this = *this + o; return *this; }
    BigInt& operator-=(const BigInt& o) { *this = *this - o; return *this; }
    BigInt& operator*=(const BigInt& o) { *this = *this * o; return *this; }

    std::string to_string() const {
        if (sign_ == 0) return "0";
        std::string s = sign_ < 0 ? "-" : "";
        s += std::to_string(limbs_.back());
        for (std::size_t i = limbs_.size() - 1; i-- > 0;) {
            std::string part = std::to_string(limbs_[i]);
            s += std::string(9 - part.size(), '0') + part;
        }
        return s;
    }

    /// Value as long long; throws if out of range.
    long long to_ll() const {
        long long v = 0;
        for (std::size_t i = limbs_.size(); i-- > 0;) {
            if (v > (0x7fffffffffffffffLL - limbs_[i]) / kBase)
                throw std::overflow_error("BigInt: to_ll overflow");
            v = v * kBase + limbs_[i];
        }
        return sign_ < 0 ? -v : v;
    }

    friend BigInt gcd(BigInt a, BigInt b) {
        a.sign_ = a.limbs_.empty() ? 0 : 1;
        b.sign_ = b.limbs_.empty() ? 0 : 1;
        while (!b.is_zero()) {
            BigInt q, r;
            divmod(a, b, q, r);
            a = std::move(b);
            b = std::move(r);
        }
        return a.is_zero() ? BigInt(0) : a;
    }

    friend BigInt pow(const BigInt& base, unsigned e) {
        BigInt r(1), b = base;
        while (e) {
            if (e & 1u) r = r * b;
            e >>= 1u;
            if (e) b = b * b;
        }
        return r;
    }

private:
    int sign_;
    std::vector<std::uint32_t> limbs_;  // little-endian, trimmed

    void trim() { while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back(); if (limbs_.empty()) sign_ = 0; }

    void mul_small(std::uint32_t f) {
        std::uint64_t carry = 0;
        for (auto& l : limbs_) {
            std::uint64_t cur = static_cast<std::uint64_t>(l) * f + carry;
            l = static_cast<std::uint32_t>(cur % kBase);
            carry = cur / kBase;
        }
        while (carry) { limbs_.push_back(static_cast<std::uint32_t>(carry % kBase)); carry /= kBase; }
        trim();
    }
    void add_small(std::uint32_t v) {
        std::uint64_t carry = v;
        for (std::size_t i = 0; carry && i < limbs_.size(); ++i) {
            std::uint64_t cur = limbs_[i] + carry;
            limbs_[i] = static_cast<std::uint32_t>(cur % kBase);
            carry = cur / kBase;
        }
        while (carry) { limbs_.push_back(static_cast<std::uint32_t>(carry % kBase)); carry /= kBase; }
    }

    static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
        if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
        for (std::size_t i = a.size(); i-- > 0;)
            if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
        return 0;
    }
    static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b) {
        const auto& big = a.size() >= b.size() ? a : b;
        const auto& small = a.size() >= b.size() ? b : a;
        std::vector<std::uint32_t> r = big;
        std::uint64_t carry = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            std::uint64_t cur = r[i] + carry + (i < small.size() ? small[i] : 0u);
            r[i] = static_cast<std::uint32_t>(cur % kBase);
            carry = cur / kBase;
            if (!carry && i >= small.size()) break;
        }
        if (carry) r.push_back(static_cast<std::uint32_t>(carry));
        return r;
    }
    // requires |a| >= |b|
    static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b) {
        std::vector<std::uint32_t> r = a;
        std::int64_t borrow = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            std::int64_t cur = static_cast<std::int64_t>(r[i]) - borrow - (i < b.size() ? b[i] : 0u);
            if (cur < 0) { cur += kBase; borrow = 1; } else borrow = 0;
            r[i] = static_cast<std::uint32_t>(cur);
            if (!borrow && i >= b.size()) break;
        }
        while (!r.empty() && r.back() == 0) r.pop_back();
        return r;
    }

    // Schoolbook long division on magnitudes; quotient digit found by binary
    // search, which is slow in theory but ample at the operand sizes seen here.
    static void divmod_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                           std::vector<std::uint32_t>& q, std::vector<std::uint32_t>& r) {
        q.assign(a.size(), 0);
        r.clear();
        for (std::size_t i = a.size(); i-- > 0;) {
            r.insert(r.begin(), a[i]);
            while (!r.empty() && r.back() == 0) r.pop_back();
            std::uint32_t lo = 0, hi = kBase - 1, digit = 0;
            while (lo <= hi) {
                std::uint32_t mid = lo + (hi - lo) / 2;
                if (cmp_mag(mul_mag_small(b, mid), r) <= 0) { digit = mid; lo = mid + 1; }
                else { if (mid == 0) break; hi = mid - 1; }
            }
            q[i] = digit;
            if (digit) {
                auto prod = mul_mag_small(b, digit);
                r = sub_mag(r, prod);
            }
        }
        while (!q.empty() && q.back() == 0) q.pop_back();
    }
    static std::vector<std::uint32_t> mul_mag_small(const std::vector<std::uint32_t>& a, std::uint32_t f) {
        if (f == 0) return {};
        std::vector<std::uint32_t> r = a;
        std::uint64_t carry = 0;
        for (auto& l : r) {
            std::uint64_t cur = static_cast<std::uint64_t>(l) * f + carry;
            l = static_cast<std::uint32_t>(cur % kBase);
            carry = cur / kBase;
        }
        while (carry) { r.push_back(static_cast<std::uint32_t>(carry % kBase)); carry /= kBase; }
        while (!r.empty() && r.back() == 0) r.pop_back();
        return r;
    }
};

}  // namespace dq
