#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace boost {

// boost::rational's mixed rational/integer operator== templates recurse
// forever under C++20 reversed-operand rewriting (`r == 0` calls `0 == r`,
// which calls `r == 0`, ...). Exact-match non-template overloads win overload
// resolution and sidestep the rewritten candidates entirely.
inline bool operator==(const rational<std::int64_t>& a, int b) {
  return a.denominator() == 1 && a.numerator() == b;
}
inline bool operator==(const rational<std::int64_t>& a, long b) {
  return a.denominator() == 1 && a.numerator() == b;
}
inline bool operator==(const rational<std::int64_t>& a, long long b) {
  return a.denominator() == 1 && a.numerator() == b;
}

}  // namespace boost

namespace preassess {

/// Exact fraction used for every probability the engine computes.
using Rational = boost::rational<std::int64_t>;

double to_double(const Rational& r);

/// "p/q", or just "p" when the denominator is 1.
std::string to_fraction_string(const Rational& r);

/// Decimal expansion rounded half-up to `digits` fractional digits, with
/// trailing zeros removed ("0.25", "0.66666666666666667", "1").
std::string to_decimal_string(const Rational& r, int digits = 17);

/// Accepts "p/q", integers, and finite decimals ("0.125", "-3.5"). Decimals
/// convert exactly. Throws Error(ParseError).
Rational parse_rational(std::string_view text);

}  // namespace preassess
