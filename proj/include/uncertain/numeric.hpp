#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdio>
#include <string>

namespace uncertain {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

template <typename P>
P prob_cast(double x);

template <>
inline double prob_cast<double>(double x) { return x; }

// Reads the probability through its shortest round-trip decimal form, so that
// an input written as 0.9 becomes exactly 9/10 rather than the nearest double.
template <>
inline Rational prob_cast<Rational>(double x) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  std::string s(buf);
  auto epos = s.find_first_of("eE");
  long exp10 = 0;
  if (epos != std::string::npos) {
    exp10 = std::strtol(s.c_str() + epos + 1, nullptr, 10);
    s = s.substr(0, epos);
  }
  bool neg = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    neg = s[0] == '-';
    s = s.substr(1);
  }
  auto dot = s.find('.');
  std::string digits = s;
  long frac = 0;
  if (dot != std::string::npos) {
    frac = static_cast<long>(s.size() - dot - 1);
    digits = s.substr(0, dot) + s.substr(dot + 1);
  }
  // a leading zero would select the octal string prefix of cpp_int
  auto first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? "0" : digits.substr(first);
  BigInt num(digits);
  if (neg) num = -num;
  long e = exp10 - frac;
  BigInt den = 1;
  if (e >= 0)
    for (long i = 0; i < e; ++i) num *= 10;
  else
    for (long i = 0; i < -e; ++i) den *= 10;
  return Rational(num, den);
}

template <typename P>
double prob_to_double(const P& x);

template <>
inline double prob_to_double<double>(const double& x) { return x; }

template <>
inline double prob_to_double<Rational>(const Rational& x) {
  return static_cast<double>(x);
}

}  // namespace uncertain
