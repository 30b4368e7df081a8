#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

#include "certilasso/errors.hpp"

namespace certilasso {

// All certified arithmetic runs on arbitrary-precision rationals. mpq_class
// keeps values canonical (positive denominator, gcd(num, den) = 1) as long as
// construction goes through make_rational / the arithmetic operators.
using Int = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(const Int& num, const Int& den) {
    if (den == 0) throw ContractError("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Rational make_rational(long num, long den = 1) {
    return make_rational(Int(num), Int(den));
}

inline Rational rational_of(const Int& z) { return Rational(z); }

inline Rational abs_r(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline int sign_r(const Rational& x) { return sgn(x); }

// 2^e for any integer e.
inline Rational pow2(long e) {
    Int p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e >= 0 ? e : -e));
    if (e >= 0) return Rational(p);
    return make_rational(Int(1), p);
}

inline Rational pow_r(const Rational& x, unsigned long e) {
    Rational r = 1;
    Rational base = x;
    unsigned long k = e;
    while (k > 0) {
        if (k & 1) r *= base;
        base *= base;
        k >>= 1;
    }
    return r;
}

inline unsigned long bit_length(const Int& z) {
    if (z == 0) return 0;
    return mpz_sizeinbase(z.get_mpz_t(), 2);
}

// Size of a rational for the oracle bit-size contract: enough bits for the
// numerator, plus the dyadic exponent of the denominator. For p/2^k in lowest
// terms this is max(bits(|p|), k).
inline unsigned long bit_size(const Rational& x) {
    unsigned long num_bits = bit_length(Int(x.get_num()));
    unsigned long den_bits = bit_length(Int(x.get_den()));
    unsigned long den_exp = den_bits == 0 ? 0 : den_bits - 1;
    return num_bits > den_exp ? num_bits : den_exp;
}

// Smallest k with x <= 2^k; requires x > 0.
inline long ceil_log2(const Rational& x) {
    if (x <= 0) throw ContractError("ceil_log2 needs a positive argument");
    const Int& p = x.get_num();
    const Int& q = x.get_den();
    long k = static_cast<long>(bit_length(p)) - static_cast<long>(bit_length(q)) - 1;
    Rational bound = pow2(k);
    while (bound < x) {
        ++k;
        bound *= 2;
    }
    return k;
}

// Nearest dyadic p/2^n, ties away from zero. |result - x| <= 2^-(n+1).
inline Rational round_to_dyadic(const Rational& x, unsigned long n) {
    Int num = x.get_num();
    Int den = x.get_den();
    Int scaled;  // num * 2^n
    mpz_mul_2exp(scaled.get_mpz_t(), num.get_mpz_t(), n);
    Int p;
    if (scaled >= 0) {
        Int t = 2 * scaled + den;
        mpz_fdiv_q(p.get_mpz_t(), t.get_mpz_t(), Int(2 * den).get_mpz_t());
    } else {
        Int t = -2 * scaled + den;
        mpz_fdiv_q(p.get_mpz_t(), t.get_mpz_t(), Int(2 * den).get_mpz_t());
        p = -p;
    }
    Int two_n;
    mpz_ui_pow_ui(two_n.get_mpz_t(), 2, n);
    return make_rational(p, two_n);
}

// floor(x * 2^n) / 2^n. 0 <= x - result < 2^-n.
inline Rational truncate_to_dyadic(const Rational& x, unsigned long n) {
    Int num = x.get_num();
    Int den = x.get_den();
    Int scaled;
    mpz_mul_2exp(scaled.get_mpz_t(), num.get_mpz_t(), n);
    Int p;
    mpz_fdiv_q(p.get_mpz_t(), scaled.get_mpz_t(), den.get_mpz_t());
    Int two_n;
    mpz_ui_pow_ui(two_n.get_mpz_t(), 2, n);
    return make_rational(p, two_n);
}

inline Int isqrt_floor(const Int& z) {
    if (z < 0) throw ContractError("isqrt of a negative integer");
    Int r;
    mpz_sqrt(r.get_mpz_t(), z.get_mpz_t());
    return r;
}

struct SqrtEnclosure {
    Rational lo;  // lo <= sqrt(x)
    Rational hi;  // sqrt(x) <= hi
    bool exact;   // lo == hi == sqrt(x)
};

// Dyadic-denominator enclosure of sqrt(x) with width <= 2^-prec_bits.
// Exact whenever x is the square of a rational with dyadic-friendly shape
// (in particular for perfect-square integers).
inline SqrtEnclosure sqrt_enclosure(const Rational& x, unsigned long prec_bits = 32) {
    if (x < 0) throw ContractError("sqrt of a negative rational");
    if (x == 0) return {Rational(0), Rational(0), true};
    const Int& p = x.get_num();
    const Int& q = x.get_den();
    // sqrt(p/q) = sqrt(p*q * 4^e) / (q * 2^e)
    Int m = p * q;
    mpz_mul_2exp(m.get_mpz_t(), m.get_mpz_t(), 2 * prec_bits);
    Int s = isqrt_floor(m);
    Int den = q;
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), prec_bits);
    bool exact = (s * s == m);
    Rational lo = make_rational(s, den);
    Rational hi = exact ? lo : make_rational(s + 1, den);
    return {lo, hi, exact};
}

// ---------------------------------------------------------------------------
// Parsing / printing. Accepted forms: "p/q", integers, decimal literals with
// optional exponent ("0.95", "-1e-3", "2.5E2"). All parsed exactly.
// ---------------------------------------------------------------------------

inline Rational rational_from_string(const std::string& s) {
    if (s.empty()) throw ParseError("empty rational literal");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::string ns = s.substr(0, slash);
        std::string ds = s.substr(slash + 1);
        Int n, d;
        if (n.set_str(ns, 10) != 0 || d.set_str(ds, 10) != 0)
            throw ParseError("bad rational literal: " + s);
        if (d == 0) throw ParseError("zero denominator: " + s);
        return make_rational(n, d);
    }
    // decimal / scientific
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') {
        neg = (s[i] == '-');
        ++i;
    }
    std::string digits;
    long frac_len = 0;
    bool seen_dot = false, seen_digit = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.') {
            if (seen_dot) throw ParseError("bad decimal literal: " + s);
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            seen_digit = true;
            if (seen_dot) ++frac_len;
        } else if (c == 'e' || c == 'E') {
            break;
        } else {
            throw ParseError("bad rational literal: " + s);
        }
    }
    if (!seen_digit) throw ParseError("bad rational literal: " + s);
    long exp10 = 0;
    if (i < s.size()) {  // exponent part
        ++i;
        if (i >= s.size()) throw ParseError("bad exponent: " + s);
        bool eneg = false;
        if (s[i] == '+' || s[i] == '-') {
            eneg = (s[i] == '-');
            ++i;
        }
        if (i >= s.size()) throw ParseError("bad exponent: " + s);
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw ParseError("bad exponent: " + s);
            exp10 = exp10 * 10 + (s[i] - '0');
            if (exp10 > 1000000) throw ParseError("exponent out of range: " + s);
        }
        if (eneg) exp10 = -exp10;
    }
    Int mant;
    if (mant.set_str(digits.empty() ? "0" : digits, 10) != 0)
        throw ParseError("bad rational literal: " + s);
    if (neg) mant = -mant;
    long e = exp10 - frac_len;
    Int num = mant, den = 1;
    Int ten_pow;
    if (e >= 0) {
        mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(e));
        num *= ten_pow;
    } else {
        mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(-e));
        den = ten_pow;
    }
    return make_rational(num, den);
}

inline std::string rational_to_string(const Rational& x) {
    if (x.get_den() == 1) return x.get_num().get_str();
    return x.get_num().get_str() + "/" + x.get_den().get_str();
}

// Convenience decimal rendering; the exact string is authoritative.
inline std::string rational_to_decimal(const Rational& x, int sig_digits = 18) {
    if (x == 0) return "0";
    mpf_class f(x, 256);
    mp_exp_t exp10 = 0;
    std::string digits = f.get_str(exp10, 10, sig_digits);
    bool neg = false;
    if (!digits.empty() && digits[0] == '-') {
        neg = true;
        digits = digits.substr(1);
    }
    if (digits.empty()) return "0";
    std::string out = digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    long e = static_cast<long>(exp10) - 1;
    if (e != 0) out += "e" + std::to_string(e);
    return (neg ? "-" : "") + out;
}

}  // namespace certilasso
