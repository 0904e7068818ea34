#include "preassess/rational.hpp"

#include <charconv>
#include <cstdlib>

#include "preassess/error.hpp"

namespace preassess {

double to_double(const Rational& r) {
  return boost::rational_cast<double>(r);
}

std::string to_fraction_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string to_decimal_string(const Rational& r, int digits) {
  __int128 num = r.numerator();
  const __int128 den = r.denominator();
  const bool negative = num < 0;
  if (negative) num = -num;

  __int128 whole = num / den;
  __int128 rem = num % den;
  std::string frac;
  frac.reserve(static_cast<std::size_t>(digits));
  for (int i = 0; i < digits; ++i) {
    rem *= 10;
    frac.push_back(static_cast<char>('0' + static_cast<int>(rem / den)));
    rem %= den;
  }
  // half-up on the next digit
  if (rem * 10 / den >= 5) {
    int i = digits - 1;
    for (; i >= 0; --i) {
      if (frac[static_cast<std::size_t>(i)] == '9') {
        frac[static_cast<std::size_t>(i)] = '0';
      } else {
        ++frac[static_cast<std::size_t>(i)];
        break;
      }
    }
    if (i < 0) ++whole;
  }
  while (!frac.empty() && frac.back() == '0') frac.pop_back();

  std::string out;
  if (negative && (whole != 0 || !frac.empty())) out.push_back('-');
  std::string w;
  if (whole == 0) w = "0";
  while (whole > 0) {
    w.insert(w.begin(), static_cast<char>('0' + static_cast<int>(whole % 10)));
    whole /= 10;
  }
  out += w;
  if (!frac.empty()) out += "." + frac;
  return out;
}

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::ParseError, "not a rational: '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view whole = text;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = parse_int(text.substr(0, slash), whole);
    const auto den = parse_int(text.substr(slash + 1), whole);
    if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(whole) + "'");
    return Rational(num, den);
  }
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  std::string_view int_part = text;
  std::string_view frac_part;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) {
    throw Error(ErrorCode::ParseError, "not a rational: '" + std::string(whole) + "'");
  }
  if (frac_part.size() > 17) {
    throw Error(ErrorCode::ParseError, "too many decimal places in '" + std::string(whole) + "'");
  }
  std::int64_t scale = 1;
  for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
  const std::int64_t ip = int_part.empty() ? 0 : parse_int(int_part, whole);
  const std::int64_t fp = frac_part.empty() ? 0 : parse_int(frac_part, whole);
  if (ip < 0 || fp < 0) throw Error(ErrorCode::ParseError, "not a rational: '" + std::string(whole) + "'");
  Rational r(ip);
  r += Rational(fp, scale);
  return negative ? -r : r;
}

}  // namespace preassess
