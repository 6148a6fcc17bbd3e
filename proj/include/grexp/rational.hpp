#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace grexp {

/// Exact rational number backed by GMP. Expression templates are disabled so
/// that `auto` captures values.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

/// Parses "p", "-p" or "p/q".
inline Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  auto valid_int = [](std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  auto to_int = [](std::string_view s) {
    if (!s.empty() && s[0] == '+') s.remove_prefix(1);
    return BigInt(std::string(s));
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    if (!valid_int(text)) throw std::invalid_argument("malformed rational: " + std::string(text));
    return Rational(to_int(text));
  }
  auto num = trim(text.substr(0, slash));
  auto den = trim(text.substr(slash + 1));
  if (!valid_int(num) || !valid_int(den))
    throw std::invalid_argument("malformed rational: " + std::string(text));
  BigInt d = to_int(den);
  if (d == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
  return Rational(to_int(num), d);
}

inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Scalar conversion used by templates that run over both exact and float
/// coefficients.
template <class T>
T scalar_cast(const Rational& r) {
  if constexpr (std::is_same_v<T, Rational>) {
    return r;
  } else {
    return static_cast<T>(r.convert_to<double>());
  }
}

template <class T>
double magnitude(const T& v) {
  if constexpr (std::is_same_v<T, Rational>) {
    return std::abs(v.template convert_to<double>());
  } else {
    return std::abs(static_cast<double>(v));
  }
}

template <class T>
bool is_zero(const T& v) {
  return v == T(0);
}

}  // namespace grexp
