#pragma once

#include <cstdint>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "hytsl/errors.hpp"

namespace hytsl {

// Arbitrary-precision signed integer, sign-magnitude over base-2^32 limbs.
// The semantics of the logic has no overflow, so neither does the artifact;
// solver eliminations in particular can grow coefficients past 64 bits.
class BigInt {
public:
    BigInt() = default;
    BigInt(long long v) {  // NOLINT: implicit by design, literals are everywhere
        if (v < 0) {
            negative_ = true;
            // careful with LLONG_MIN
            unsigned long long m = static_cast<unsigned long long>(-(v + 1)) + 1ULL;
            set_mag(m);
        } else {
            set_mag(static_cast<unsigned long long>(v));
        }
    }

    static BigInt from_string(std::string_view s) {
        BigInt r;
        bool neg = false;
        size_t i = 0;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
            neg = s[i] == '-';
            ++i;
        }
        if (i == s.size()) throw Error("empty integer literal");
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw Error("bad integer literal: " + std::string(s));
            r.mul_small(10);
            r.add_small(static_cast<uint32_t>(s[i] - '0'));
        }
        r.negative_ = neg && !r.is_zero();
        return r;
    }

    bool is_zero() const { return mag_.empty(); }
    bool is_negative() const { return negative_; }
    bool is_one() const { return !negative_ && mag_.size() == 1 && mag_[0] == 1; }

    BigInt operator-() const {
        BigInt r = *this;
        if (!r.is_zero()) r.negative_ = !r.negative_;
        return r;
    }

    BigInt abs() const {
        BigInt r = *this;
        r.negative_ = false;
        return r;
    }

    friend BigInt operator+(const BigInt& a, const BigInt& b) {
        if (a.negative_ == b.negative_) {
            BigInt r;
            r.mag_ = add_mag(a.mag_, b.mag_);
            r.negative_ = a.negative_ && !r.mag_.empty();
            return r;
        }
        int c = cmp_mag(a.mag_, b.mag_);
        BigInt r;
        if (c == 0) return r;
        if (c > 0) {
            r.mag_ = sub_mag(a.mag_, b.mag_);
            r.negative_ = a.negative_;
        } else {
            r.mag_ = sub_mag(b.mag_, a.mag_);
            r.negative_ = b.negative_;
        }
        if (r.mag_.empty()) r.negative_ = false;
        return r;
    }

    friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

    friend BigInt operator*(const BigInt& a, const BigInt& b) {
        BigInt r;
        if (a.is_zero() || b.is_zero()) return r;
        r.mag_.assign(a.mag_.size() + b.mag_.size(), 0);
        for (size_t i = 0; i < a.mag_.size(); ++i) {
            uint64_t carry = 0;
            for (size_t j = 0; j < b.mag_.size(); ++j) {
                uint64_t cur = static_cast<uint64_t>(a.mag_[i]) * b.mag_[j] + r.mag_[i + j] + carry;
                r.mag_[i + j] = static_cast<uint32_t>(cur);
                carry = cur >> 32;
            }
            size_t k = i + b.mag_.size();
            while (carry) {
                uint64_t cur = r.mag_[k] + carry;
                r.mag_[k] = static_cast<uint32_t>(cur);
                carry = cur >> 32;
                ++k;
            }
        }
        r.trim();
        r.negative_ = (a.negative_ != b.negative_) && !r.mag_.empty();
        return r;
    }

    BigInt& operator+=(const BigInt& o) { return *this = *this + o; }
    BigInt& operator-=(const BigInt& o) { return *this = *this - o; }
    BigInt& operator*=(const BigInt& o) { return *this = *this * o; }

    // Truncated division (C semantics): quotient rounds toward zero.
    static void divmod_trunc(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
        if (b.is_zero()) throw Error("division by zero");
        std::vector<uint32_t> qm, rm;
        divmod_mag(a.mag_, b.mag_, qm, rm);
        q.mag_ = std::move(qm);
        q.trim();
        q.negative_ = (a.negative_ != b.negative_) && !q.mag_.empty();
        r.mag_ = std::move(rm);
        r.trim();
        r.negative_ = a.negative_ && !r.mag_.empty();
    }

    // Floor division: quotient rounds toward -inf, remainder has divisor's sign.
    static BigInt floor_div(const BigInt& a, const BigInt& b) {
        BigInt q, r;
        divmod_trunc(a, b, q, r);
        if (!r.is_zero() && (a.negative_ != b.negative_)) q -= BigInt(1);
        return q;
    }

    static BigInt floor_mod(const BigInt& a, const BigInt& b) {
        return a - floor_div(a, b) * b;
    }

    // Exact division; throws if there is a remainder.
    static BigInt div_exact(const BigInt& a, const BigInt& b) {
        BigInt q, r;
        divmod_trunc(a, b, q, r);
        if (!r.is_zero()) throw Error("div_exact with remainder");
        return q;
    }

    static BigInt gcd(BigInt a, BigInt b) {
        a.negative_ = false;
        b.negative_ = false;
        while (!b.is_zero()) {
            BigInt q, r;
            divmod_trunc(a, b, q, r);
            a = std::move(b);
            b = std::move(r);
        }
        return a;
    }

    friend bool operator==(const BigInt& a, const BigInt& b) {
        return a.negative_ == b.negative_ && a.mag_ == b.mag_;
    }

    friend std::strong_ordering operator<=>(const BigInt& a, const BigInt& b) {
        if (a.negative_ != b.negative_) return a.negative_ ? std::strong_ordering::less : std::strong_ordering::greater;
        int c = cmp_mag(a.mag_, b.mag_);
        if (a.negative_) c = -c;
        if (c < 0) return std::strong_ordering::less;
        if (c > 0) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    bool fits_int64() const {
        if (mag_.size() > 2) return false;
        unsigned long long m = mag_u64();
        return negative_ ? m <= 0x8000000000000000ULL : m <= 0x7FFFFFFFFFFFFFFFULL;
    }

    long long to_int64() const {
        if (!fits_int64()) throw Error("BigInt does not fit in int64: " + to_string());
        unsigned long long m = mag_u64();
        if (negative_) return -static_cast<long long>(m - 1) - 1;
        return static_cast<long long>(m);
    }

    std::string to_string() const {
        if (is_zero()) return "0";
        std::vector<uint32_t> tmp = mag_;
        std::string digits;
        while (!tmp.empty()) {
            uint64_t rem = 0;
            for (size_t i = tmp.size(); i-- > 0;) {
                uint64_t cur = (rem << 32) | tmp[i];
                tmp[i] = static_cast<uint32_t>(cur / 1000000000ULL);
                rem = cur % 1000000000ULL;
            }
            while (!tmp.empty() && tmp.back() == 0) tmp.pop_back();
            for (int d = 0; d < 9; ++d) {
                digits.push_back(static_cast<char>('0' + rem % 10));
                rem /= 10;
            }
        }
        while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
        std::string out;
        if (negative_) out.push_back('-');
        out.append(digits.rbegin(), digits.rend());
        return out;
    }

private:
    bool negative_ = false;
    std::vector<uint32_t> mag_;  // little-endian, no leading zeros, empty == 0

    void trim() {
        while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
        if (mag_.empty()) negative_ = false;
    }

    void set_mag(unsigned long long m) {
        mag_.clear();
        while (m) {
            mag_.push_back(static_cast<uint32_t>(m));
            m >>= 32;
        }
    }

    unsigned long long mag_u64() const {
        unsigned long long m = 0;
        if (mag_.size() > 1) m = static_cast<unsigned long long>(mag_[1]) << 32;
        if (!mag_.empty()) m |= mag_[0];
        return m;
    }

    void mul_small(uint32_t f) {
        uint64_t carry = 0;
        for (auto& limb : mag_) {
            uint64_t cur = static_cast<uint64_t>(limb) * f + carry;
            limb = static_cast<uint32_t>(cur);
            carry = cur >> 32;
        }
        if (carry) mag_.push_back(static_cast<uint32_t>(carry));
    }

    void add_small(uint32_t v) {
        uint64_t carry = v;
        for (auto& limb : mag_) {
            if (!carry) break;
            uint64_t cur = limb + carry;
            limb = static_cast<uint32_t>(cur);
            carry = cur >> 32;
        }
        if (carry) mag_.push_back(static_cast<uint32_t>(carry));
    }

    static int cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
        if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
        for (size_t i = a.size(); i-- > 0;) {
            if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
        }
        return 0;
    }

    static std::vector<uint32_t> add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
        std::vector<uint32_t> r(std::max(a.size(), b.size()) + 1, 0);
        uint64_t carry = 0;
        for (size_t i = 0; i < r.size(); ++i) {
            uint64_t cur = carry;
            if (i < a.size()) cur += a[i];
            if (i < b.size()) cur += b[i];
            r[i] = static_cast<uint32_t>(cur);
            carry = cur >> 32;
        }
        while (!r.empty() && r.back() == 0) r.pop_back();
        return r;
    }

    // requires |a| >= |b|
    static std::vector<uint32_t> sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
        std::vector<uint32_t> r = a;
        int64_t borrow = 0;
        for (size_t i = 0; i < r.size(); ++i) {
            int64_t cur = static_cast<int64_t>(r[i]) - borrow - (i < b.size() ? b[i] : 0);
            if (cur < 0) {
                cur += (1LL << 32);
                borrow = 1;
            } else {
                borrow = 0;
            }
            r[i] = static_cast<uint32_t>(cur);
        }
        while (!r.empty() && r.back() == 0) r.pop_back();
        return r;
    }

    // Shift-and-subtract long division on magnitudes; fine at the scales here.
    static void divmod_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b,
                           std::vector<uint32_t>& q, std::vector<uint32_t>& r) {
        q.assign(a.size(), 0);
        r.clear();
        for (size_t i = a.size(); i-- > 0;) {
            for (int bit = 31; bit >= 0; --bit) {
                shl1(r);
                if (a[i] & (1u << bit)) {
                    if (r.empty())
                        r.push_back(1);
                    else
                        r[0] |= 1;
                }
                if (cmp_mag(r, b) >= 0) {
                    r = sub_mag(r, b);
                    q[i] |= (1u << bit);
                }
            }
        }
        while (!q.empty() && q.back() == 0) q.pop_back();
    }

    static void shl1(std::vector<uint32_t>& v) {
        uint32_t carry = 0;
        for (auto& limb : v) {
            uint32_t next = limb >> 31;
            limb = (limb << 1) | carry;
            carry = next;
        }
        if (carry) v.push_back(carry);
    }
};

inline std::string to_string(const BigInt& v) { return v.to_string(); }

}  // namespace hytsl
