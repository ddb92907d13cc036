#ifndef EVOGRID_RATIONAL_HPP
#define EVOGRID_RATIONAL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <boost/rational.hpp>

namespace evogrid {

// All payoff arithmetic is exact. Absorbing-state membership and the
// consensus condition are equality tests on sums of payoff entries, so
// nothing in the payoff path may touch floating point.
//
// Compare equality against Rational values only, never integer literals:
// boost 1.74's rational recurses through the C++20 rewritten operator==
// when handed an int.
using Rational = boost::rational<long long>;

// Accepts "3", "-2", "5/8", "0.76", "-0.3", "1/3". Decimal strings are
// parsed exactly (digits over a power of ten).
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    long long num = std::stoll(s.substr(0, slash));
    long long den = std::stoll(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: " + s);
    return Rational(num, den);
  }
  bool neg = false;
  std::size_t pos = 0;
  if (s[0] == '+' || s[0] == '-') {
    neg = (s[0] == '-');
    pos = 1;
  }
  auto dot = s.find('.');
  std::string digits;
  long long den = 1;
  if (dot == std::string::npos) {
    digits = s.substr(pos);
  } else {
    digits = s.substr(pos, dot - pos) + s.substr(dot + 1);
    for (std::size_t i = dot + 1; i < s.size(); ++i) {
      den *= 10;
      if (den > 1000000000000000000LL / 10)
        throw std::invalid_argument("too many fractional digits: " + s);
    }
  }
  if (digits.empty()) throw std::invalid_argument("malformed rational literal: " + s);
  long long num = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') throw std::invalid_argument("malformed rational literal: " + s);
    num = num * 10 + (c - '0');
  }
  Rational r(num, den);
  return neg ? -r : r;
}

// Lossless round-trip with parse_rational. Integers print bare, dyadic/decimal
// denominators print as decimals, everything else as "num/den".
inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  long long den = r.denominator();
  int twos = 0, fives = 0;
  long long d = den;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d == 1) {
    int digits = twos > fives ? twos : fives;
    if (digits <= 12) {
      long long scale = 1;
      for (int i = 0; i < digits; ++i) scale *= 10;
      long long num = r.numerator() * (scale / den);
      bool neg = num < 0;
      if (neg) num = -num;
      std::string frac = std::to_string(num % scale);
      frac.insert(frac.begin(), digits - static_cast<int>(frac.size()), '0');
      return (neg ? "-" : "") + std::to_string(num / scale) + "." + frac;
    }
  }
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace evogrid

#endif
