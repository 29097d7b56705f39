#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace treedyn {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Base of every exception thrown by the library.  The message always starts
/// with a short stable tag ("cycle detected", "not a rome", ...) so callers
/// and tests can match on it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TreeError : public Error {
 public:
  using Error::Error;
};

class MapError : public Error {
 public:
  using Error::Error;
};

class SpectralError : public Error {
 public:
  using Error::Error;
};

class DynamicsError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Parses "p/q", "p" or "-p/q" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  auto bad = [&] { return Error("invalid rational: '" + std::string(text) + "'"); };
  if (text.empty()) throw bad();
  auto parse_int = [&](std::string_view s) {
    if (s.empty()) throw bad();
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw bad();
    for (std::size_t j = i; j < s.size(); ++j)
      if (s[j] < '0' || s[j] > '9') throw bad();
    return Integer(std::string(s));
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  Integer den = parse_int(text.substr(slash + 1));
  if (den == 0) throw bad();
  return Rational(parse_int(text.substr(0, slash)), den);
}

/// Canonical text form: "p" for integers, "p/q" otherwise.
inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Exact rational value of a finite double.
inline Rational from_double(double x) {
  if (!std::isfinite(x)) throw Error("non-finite value");
  int exp = 0;
  double mant = std::frexp(x, &exp);
  // 53 bits of mantissa fit exactly in an int64 after scaling.
  auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  Rational r(scaled);
  int shift = exp - 53;
  Integer pow2 = Integer(1) << std::abs(shift);
  if (shift >= 0) return r * pow2;
  return r / pow2;
}

inline double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

}  // namespace treedyn
