#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace budgeted {

/// Exact rational number, always kept in lowest terms with a positive denominator.
using Rational = mpq_class;

/// Builds num/den in canonical form. Throws std::invalid_argument on a zero denominator.
inline Rational make_rational(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

/**
 * Parses "num/den", an integer, or a decimal literal such as "-0.125" or "2.5e-3".
 *
 * Decimal literals are converted exactly through a power-of-ten denominator,
 * so "0.1" is 1/10 and never the nearest binary double.
 */
inline Rational parse_rational(std::string_view text) {
    auto fail = [&](const char* why) {
        throw std::invalid_argument("invalid rational \"" + std::string(text) + "\": " + why);
    };
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) fail("empty");

    if (auto slash = s.find('/'); slash != std::string::npos) {
        const std::string num = s.substr(0, slash);
        const std::string den = s.substr(slash + 1);
        auto is_int = [](const std::string& t, bool allow_sign) {
            std::size_t i = 0;
            if (allow_sign && i < t.size() && (t[i] == '-' || t[i] == '+')) ++i;
            if (i == t.size()) return false;
            for (; i < t.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
            return true;
        };
        if (!is_int(num, true) || !is_int(den, false)) fail("expected integer/integer");
        mpz_class n(num[0] == '+' ? num.substr(1) : num, 10);
        mpz_class d(den, 10);
        if (d == 0) fail("zero denominator");
        Rational q(n, d);
        q.canonicalize();
        return q;
    }

    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '-' || s[i] == '+') negative = s[i++] == '-';
    std::string digits;
    long scale = 0;  // value = digits * 10^(-scale)
    bool seen_digit = false, seen_point = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            seen_digit = true;
            if (seen_point) ++scale;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) fail("no digits");
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') fail("unexpected character");
        ++i;
        bool exp_negative = false;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) exp_negative = s[i++] == '-';
        if (i == s.size()) fail("empty exponent");
        long exponent = 0;
        for (; i < s.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) fail("bad exponent");
            exponent = exponent * 10 + (s[i] - '0');
            if (exponent > 100000) fail("exponent out of range");
        }
        scale += exp_negative ? exponent : -exponent;
    }
    mpz_class n(digits, 10);
    if (negative) n = -n;
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
    Rational q = scale >= 0 ? Rational(n, p10) : Rational(n * p10, 1);
    q.canonicalize();
    return q;
}

/// "num/den", or just "num" when the denominator is 1.
inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

/// 17 significant digits; round-trips any double.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace budgeted
