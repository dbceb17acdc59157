// Forward-mode dual numbers: value + first derivative.
#pragma once

#include <cmath>

namespace weingarten {

/// A value together with the coefficient of the infinitesimal. Arithmetic
/// follows the sum/product/chain rules, so evaluating a function at
/// Dual{x, 1} yields (f(x), f'(x)).
struct Dual {
  double value = 0.0;
  double deriv = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double v, double d = 0.0) : value(v), deriv(d) {}

  static constexpr Dual variable(double v) { return {v, 1.0}; }
  static constexpr Dual constant(double v) { return {v, 0.0}; }
};

constexpr Dual operator+(Dual a, Dual b) { return {a.value + b.value, a.deriv + b.deriv}; }
constexpr Dual operator-(Dual a, Dual b) { return {a.value - b.value, a.deriv - b.deriv}; }
constexpr Dual operator-(Dual a) { return {-a.value, -a.deriv}; }
constexpr Dual operator*(Dual a, Dual b) {
  return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
}
constexpr Dual operator/(Dual a, Dual b) {
  return {a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)};
}

inline Dual exp(Dual a) {
  const double e = std::exp(a.value);
  return {e, e * a.deriv};
}
inline Dual log(Dual a) { return {std::log(a.value), a.deriv / a.value}; }
inline Dual sqrt(Dual a) {
  const double r = std::sqrt(a.value);
  return {r, a.deriv / (2.0 * r)};
}
inline Dual tanh(Dual a) {
  const double t = std::tanh(a.value);
  return {t, (1.0 - t * t) * a.deriv};
}
inline Dual abs(Dual a) { return a.value < 0.0 ? -a : a; }

/// a^p for a constant exponent; valid for negative a when p is an integer.
inline Dual pow(Dual a, double p) {
  if (p == 0.0) return {1.0, 0.0};
  return {std::pow(a.value, p), p * std::pow(a.value, p - 1.0) * a.deriv};
}

/// a^b with both operands varying; requires a > 0.
inline Dual pow(Dual a, Dual b) {
  if (b.deriv == 0.0) return pow(a, b.value);
  const double v = std::pow(a.value, b.value);
  return {v, v * (b.deriv * std::log(a.value) + b.value * a.deriv / a.value)};
}

}  // namespace weingarten
