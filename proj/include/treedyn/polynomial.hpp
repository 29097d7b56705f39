#pragma once

// Dense univariate polynomials with arbitrary-precision integer coefficients.

#include "treedyn/core.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace treedyn {

/// Coefficients are stored lowest degree first; the zero polynomial has no
/// coefficients.
class IntPoly {
 public:
  IntPoly() = default;
  explicit IntPoly(std::vector<Integer> coeffs) : c_(std::move(coeffs)) { trim(); }
  IntPoly(std::initializer_list<long long> coeffs) {
    for (auto x : coeffs) c_.emplace_back(x);
    trim();
  }

  static IntPoly constant(const Integer& v) { return IntPoly(std::vector<Integer>{v}); }
  /// v * y^k
  static IntPoly monomial(const Integer& v, std::size_t k) {
    std::vector<Integer> c(k + 1);
    c[k] = v;
    return IntPoly(std::move(c));
  }

  bool is_zero() const { return c_.empty(); }
  /// Degree; -1 for the zero polynomial.
  long degree() const { return static_cast<long>(c_.size()) - 1; }
  const std::vector<Integer>& coeffs() const { return c_; }
  Integer coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Integer(0); }
  const Integer& leading() const { return c_.back(); }

  IntPoly& operator+=(const IntPoly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    trim();
    return *this;
  }
  IntPoly& operator-=(const IntPoly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    trim();
    return *this;
  }
  friend IntPoly operator+(IntPoly a, const IntPoly& b) { return a += b; }
  friend IntPoly operator-(IntPoly a, const IntPoly& b) { return a -= b; }
  friend IntPoly operator-(IntPoly a) {
    for (auto& x : a.c_) x = -x;
    return a;
  }
  friend IntPoly operator*(const IntPoly& a, const IntPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Integer> r(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (a.c_[i] == 0) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    }
    return IntPoly(std::move(r));
  }
  friend IntPoly operator*(IntPoly a, const Integer& s) {
    for (auto& x : a.c_) x *= s;
    a.trim();
    return a;
  }
  /// Multiplication by y^k.
  IntPoly shifted(std::size_t k) const {
    if (is_zero()) return {};
    std::vector<Integer> r(k, Integer(0));
    r.insert(r.end(), c_.begin(), c_.end());
    return IntPoly(std::move(r));
  }

  /// Exact quotient; throws if `d` does not divide this polynomial over Z.
  IntPoly divexact(const IntPoly& d) const {
    if (d.is_zero()) throw Error("polynomial division by zero");
    if (is_zero()) return {};
    std::vector<Integer> rem = c_;
    long dd = d.degree();
    long dn = degree();
    if (dn < dd) throw Error("inexact polynomial division");
    std::vector<Integer> q(static_cast<std::size_t>(dn - dd + 1));
    for (long i = dn - dd; i >= 0; --i) {
      const Integer& top = rem[static_cast<std::size_t>(i + dd)];
      if (top == 0) continue;
      if (top % d.leading() != 0) throw Error("inexact polynomial division");
      Integer f = top / d.leading();
      q[static_cast<std::size_t>(i)] = f;
      for (long j = 0; j <= dd; ++j) rem[static_cast<std::size_t>(i + j)] -= f * d.c_[static_cast<std::size_t>(j)];
    }
    for (const auto& r : rem)
      if (r != 0) throw Error("inexact polynomial division");
    return IntPoly(std::move(q));
  }

  double eval(double x) const {
    double acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + it->convert_to<double>();
    return acc;
  }

  friend bool operator==(const IntPoly& a, const IntPoly& b) { return a.c_ == b.c_; }

  std::string str(const char* var = "x") const {
    if (is_zero()) return "0";
    std::string out;
    for (long i = degree(); i >= 0; --i) {
      const Integer& v = c_[static_cast<std::size_t>(i)];
      if (v == 0) continue;
      Integer mag = abs(v);
      out += out.empty() ? (v < 0 ? "-" : "") : (v < 0 ? " - " : " + ");
      if (mag != 1 || i == 0) out += mag.str();
      if (i >= 1) out += var;
      if (i >= 2) out += "^" + std::to_string(i);
    }
    return out;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Integer> c_;
};

namespace detail {

/// True iff every Taylor coefficient of p at x = a / 2^s is nonnegative.
inline bool taylor_nonnegative(const IntPoly& p, const Integer& a, unsigned s) {
  const auto d = static_cast<std::size_t>(p.degree());
  std::vector<Integer> c(d + 1);
  for (std::size_t i = 0; i <= d; ++i) c[i] = p.coeff(i) << static_cast<unsigned>(s * (d - i));
  // c(a + u) by repeated synthetic division.
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = d; j-- > i;) c[j] += a * c[j + 1];
  return std::all_of(c.begin(), c.end(), [](const Integer& v) { return v >= 0; });
}

}  // namespace detail

/// Largest real root of the monic polynomial det(xE - M) of a nonnegative
/// matrix M, given an upper bound for it.
///
/// For x at or above the spectral radius every derivative of det(xE - M) is a
/// sum of principal minors of the M-matrix xE - M and hence nonnegative; below
/// the largest real root some derivative is negative.  The predicate is
/// monotone, so bisection works for roots of any multiplicity.
inline double largest_root_of_nonnegative_charpoly(const IntPoly& q, const Integer& upper, double tol = 1e-12) {
  if (q.is_zero() || q.leading() <= 0) throw Error("largest_root: polynomial must have positive leading coefficient");
  if (!(tol > 0)) throw Error("largest_root: tolerance must be positive");
  if (detail::taylor_nonnegative(q, 0, 0)) return 0.0;
  // Invariant: predicate(lo) false, predicate(hi) true; lo = lo_num/2^s.
  Integer lo_num = 0, hi_num = upper;
  unsigned s = 0;
  if (!detail::taylor_nonnegative(q, hi_num, 0)) throw Error("largest_root: upper bound too small");
  auto width = [&] { return ldexp((hi_num - lo_num).convert_to<double>(), -static_cast<int>(s)); };
  while (width() > tol) {
    lo_num <<= 1;
    hi_num <<= 1;
    ++s;
    Integer mid = (lo_num + hi_num) >> 1;
    if (detail::taylor_nonnegative(q, mid, s))
      hi_num = mid;
    else
      lo_num = mid;
  }
  double lo = ldexp(lo_num.convert_to<double>(), -static_cast<int>(s));
  double hi = ldexp(hi_num.convert_to<double>(), -static_cast<int>(s));
  return 0.5 * (lo + hi);
}

}  // namespace treedyn
