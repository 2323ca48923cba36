#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "cdyb/error.hpp"

namespace cdyb {

using Rational = boost::multiprecision::cpp_rational;
using cplx = std::complex<double>;

/// Dense coefficient vectors over the algebra basis.
using RVec = std::vector<Rational>;
using CVec = std::vector<cplx>;

/// Exact rationals print as "p/q", or "p" when the denominator is one.
inline std::string to_string(const Rational& q) {
  auto num = boost::multiprecision::numerator(q);
  auto den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
    boost::multiprecision::cpp_int num(s.substr(0, slash));
    boost::multiprecision::cpp_int den(s.substr(slash + 1));
    if (den == 0) throw Error(ErrorKind::InvalidInput, "zero denominator in '" + s + "'");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw Error(ErrorKind::InvalidInput, "malformed rational '" + s + "'");
  }
}

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static bool is_zero(const Rational& x) { return x == 0; }
  static double abs(const Rational& x) { return std::fabs(x.convert_to<double>()); }
  static cplx to_complex(const Rational& x) { return {x.convert_to<double>(), 0.0}; }
  static constexpr bool exact = true;
};

template <>
struct ScalarTraits<cplx> {
  static bool is_zero(const cplx& x) { return x == cplx(0.0, 0.0); }
  static double abs(const cplx& x) { return std::abs(x); }
  static cplx to_complex(const cplx& x) { return x; }
  static constexpr bool exact = false;
};

/// Converts an exact structure constant into the working scalar type.
template <class T>
T scalar_from(const Rational& q) {
  if constexpr (std::is_same_v<T, Rational>) {
    return q;
  } else {
    return T(q.convert_to<double>());
  }
}

inline CVec to_complex(const RVec& v) {
  CVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = ScalarTraits<Rational>::to_complex(v[i]);
  return out;
}

template <class T>
double max_abs(const std::vector<T>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, ScalarTraits<T>::abs(x));
  return m;
}

template <class T>
std::vector<T> operator+(std::vector<T> a, const std::vector<T>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

template <class T>
std::vector<T> operator-(std::vector<T> a, const std::vector<T>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

template <class T>
std::vector<T> scaled(std::vector<T> a, const T& s) {
  for (auto& x : a) x *= s;
  return a;
}

}  // namespace cdyb
