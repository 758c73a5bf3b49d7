#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/rational.hpp>

namespace hcc {

using Rational = boost::rational<long long>;

inline double to_double(const Rational& q) {
    return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

// Parse a plain decimal literal ("0.1", "2", "-3.25") into an exact rational.
inline Rational parse_decimal(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("parse_decimal: empty string");
    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '+' || text[i] == '-') {
        negative = text[i] == '-';
        ++i;
    }
    long long num = 0;
    long long den = 1;
    bool seen_digit = false;
    bool after_point = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.') {
            if (after_point) throw std::invalid_argument("parse_decimal: bad literal " + text);
            after_point = true;
            continue;
        }
        if (c < '0' || c > '9')
            throw std::invalid_argument("parse_decimal: bad literal " + text);
        num = num * 10 + (c - '0');
        if (after_point) den *= 10;
        seen_digit = true;
    }
    if (!seen_digit) throw std::invalid_argument("parse_decimal: bad literal " + text);
    return Rational(negative ? -num : num, den);
}

}  // namespace hcc
