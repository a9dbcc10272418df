#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

#include "ccw/errors.hpp"

namespace ccw {

// Exact coefficients everywhere on the symbolic side; doubles enter only at
// evaluation and optimization boundaries.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational rational_pow(const Rational& base, unsigned exp) {
    Rational r = 1;
    Rational b = base;
    unsigned e = exp;
    while (e > 0) {
        if (e & 1u) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

// Parses "p", "p/q", or a plain decimal like "-0.25" into an exact rational.
inline Rational parse_rational(const std::string& text) {
    auto fail = [&]() -> Rational {
        throw UsageError("cannot parse rational literal '" + text + "'");
    };
    if (text.empty()) return fail();
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            Integer num(text.substr(0, slash));
            Integer den(text.substr(slash + 1));
            if (den == 0) throw UsageError("zero denominator in '" + text + "'");
            return Rational(num, den);
        }
        auto dot = text.find('.');
        if (dot == std::string::npos) return Rational(Integer(text));
        std::string head = text.substr(0, dot);
        std::string frac = text.substr(dot + 1);
        if (frac.find_first_not_of("0123456789") != std::string::npos) return fail();
        bool neg = !head.empty() && head[0] == '-';
        if (head == "-" || head == "+") head += "0";
        if (head.empty()) head = "0";
        Integer ip(head);
        Integer den = 1;
        for (size_t i = 0; i < frac.size(); ++i) den *= 10;
        Integer fp = frac.empty() ? Integer(0) : Integer(frac);
        Rational r = Rational(ip) + (neg ? -Rational(fp, den) : Rational(fp, den));
        return r;
    } catch (const std::exception&) {
        return fail();
    }
}

inline std::string to_string(const Rational& r) { return r.str(); }

}  // namespace ccw
