#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace recon {

/// Scalar for the exact (rational-arithmetic) computation mode.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& x) { return x.template convert_to<double>(); }
inline double to_double(double x) { return x; }

/// Parses a decimal literal ("0.6", "-0.125", "3", "7/10") into an exact rational.
inline Rational rational_from_decimal(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty numeric literal");
    if (auto slash = text.find('/'); slash != std::string::npos) {
        boost::multiprecision::cpp_int num(text.substr(0, slash));
        boost::multiprecision::cpp_int den(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
        return Rational(num, den);
    }
    std::string digits;
    digits.reserve(text.size());
    bool negative = false;
    long frac_digits = -1;
    std::size_t i = 0;
    if (text[i] == '+' || text[i] == '-') {
        negative = text[i] == '-';
        ++i;
    }
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (frac_digits >= 0) throw std::invalid_argument("malformed literal '" + text + "'");
            frac_digits = 0;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            if (frac_digits >= 0) ++frac_digits;
        } else {
            throw std::invalid_argument("malformed literal '" + text + "'");
        }
    }
    if (digits.empty()) throw std::invalid_argument("malformed literal '" + text + "'");
    // cpp_int reads a leading 0 as an octal prefix
    const auto first_nonzero = digits.find_first_not_of('0');
    digits = first_nonzero == std::string::npos ? "0" : digits.substr(first_nonzero);
    boost::multiprecision::cpp_int num(digits);
    boost::multiprecision::cpp_int den = 1;
    for (long k = 0; k < std::max(frac_digits, 0L); ++k) den *= 10;
    Rational r(num, den);
    return negative ? -r : r;
}

}  // namespace recon
