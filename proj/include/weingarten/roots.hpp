// Bracketed root finding for monotone scalar functions.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "weingarten/dual.hpp"
#include "weingarten/errors.hpp"

namespace weingarten {

/// Safeguarded Newton iteration on a sign-changing bracket [lo, hi].
///
/// `fn` maps a double to a Dual (value and derivative). Each iterate
/// shrinks the bracket; a Newton step is taken when it lands strictly
/// inside the bracket, otherwise the midpoint is used. The loop stops when
/// |fn(x)| <= value_tol or when the bracket has collapsed to adjacent
/// doubles, in which case the endpoint with the smaller residual is
/// returned. Throws NoSignChange if fn(lo) and fn(hi) share a strict sign.
template <class Fn>
double solve_bracketed(Fn&& fn, double lo, double hi, double value_tol,
                       std::optional<double> guess = std::nullopt) {
  if (lo > hi) std::swap(lo, hi);
  Dual flo = fn(lo);
  Dual fhi = fn(hi);
  if (std::abs(flo.value) <= value_tol) return lo;
  if (std::abs(fhi.value) <= value_tol) return hi;
  if ((flo.value > 0.0) == (fhi.value > 0.0)) {
    throw NoSignChange("function does not change sign on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  const bool increasing = fhi.value > 0.0;

  double x = guess && *guess > lo && *guess < hi ? *guess : 0.5 * (lo + hi);
  for (int iter = 0; iter < 2000; ++iter) {
    const Dual fx = fn(x);
    if (!std::isfinite(fx.value)) {
      // Treat a non-finite probe as lying beyond the root on the hi side.
      hi = x;
      x = 0.5 * (lo + hi);
      continue;
    }
    if (std::abs(fx.value) <= value_tol) return x;
    if ((fx.value > 0.0) == increasing) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
    if (std::nextafter(lo, hi) >= hi) {
      return std::abs(flo.value) <= std::abs(fhi.value) ? lo : hi;
    }
    double next = std::numeric_limits<double>::quiet_NaN();
    if (fx.deriv != 0.0 && std::isfinite(fx.deriv)) next = x - fx.value / fx.deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

}  // namespace weingarten
