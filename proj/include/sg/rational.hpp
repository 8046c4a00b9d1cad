#pragma once

#include <gmpxx.h>

#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>

namespace sg {

/// Exact rational number. All probabilities and exact value vectors use this
/// type; conversion to binary64 happens only at solver boundaries.
using Rat = mpq_class;

inline Rat make_rat(long num, long den = 1) {
    Rat q(num, den);
    q.canonicalize();
    return q;
}

inline double to_double(const Rat& q) { return q.get_d(); }

/// Renders as "num/den" with the denominator always present ("1/1", "2/5").
inline std::string to_fraction_string(const Rat& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Shortest decimal string that round-trips through binary64.
inline std::string to_roundtrip_decimal(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// True iff the denominator is a power of two. When `bits` is given it
/// receives the exponent (denominator = 2^bits).
inline bool is_dyadic(const Rat& q, int* bits = nullptr) {
    mpz_class den = q.get_den();
    if (den <= 0) return false;
    // den is a power of two iff its scan for a second set bit fails
    mp_bitcnt_t lowest = mpz_scan1(den.get_mpz_t(), 0);
    if (mpz_sizeinbase(den.get_mpz_t(), 2) != lowest + 1) return false;
    if (bits) *bits = static_cast<int>(lowest);
    return true;
}

/// Nearest dyadic rational round(v * 2^bits) / 2^bits, clamped to [0,1].
inline Rat dyadic_quantize(double v, int bits) {
    if (v <= 0.0) return Rat(0);
    if (v >= 1.0) return Rat(1);
    mpz_class den = 1;
    den <<= bits;
    mpf_class scaled(v, 64 + bits);
    scaled *= mpf_class(den, 64 + bits);
    mpz_class num;
    mpz_set_f(num.get_mpz_t(), mpf_class(scaled + 0.5).get_mpf_t());
    if (num < 0) num = 0;
    if (num > den) num = den;
    Rat q(num, den);
    q.canonicalize();
    return q;
}

/// Parses "p/q" (integers, q > 0) or a terminating decimal ("0.25", "1").
/// Returns nullopt on malformed input.
inline std::optional<Rat> parse_rational(const std::string& tok) {
    if (tok.empty()) return std::nullopt;
    auto is_digits = [](const std::string& s) {
        if (s.empty()) return false;
        for (char c : s)
            if (c < '0' || c > '9') return false;
        return true;
    };
    auto slash = tok.find('/');
    if (slash != std::string::npos) {
        std::string num = tok.substr(0, slash), den = tok.substr(slash + 1);
        if (!is_digits(num) || !is_digits(den)) return std::nullopt;
        mpz_class n(num), d(den);
        if (d == 0) return std::nullopt;
        Rat q(n, d);
        q.canonicalize();
        return q;
    }
    auto dot = tok.find('.');
    if (dot == std::string::npos) {
        if (!is_digits(tok)) return std::nullopt;
        return Rat(mpz_class(tok));
    }
    std::string whole = tok.substr(0, dot), frac = tok.substr(dot + 1);
    if (!is_digits(whole) || !is_digits(frac)) return std::nullopt;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    mpz_class n = mpz_class(whole) * scale + mpz_class(frac);
    Rat q(n, scale);
    q.canonicalize();
    return q;
}

}  // namespace sg
