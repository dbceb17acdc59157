// Dormand-Prince 5(4) stepper with continuous (dense) output.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "weingarten/errors.hpp"

namespace weingarten::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

/// Quartic interpolant over one accepted step [s0, s0 + h].
template <std::size_t N>
struct DenseStep {
  double s0 = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 5> r{};

  Vec<N> eval(double s) const {
    const double th = h == 0.0 ? 0.0 : (s - s0) / h;
    const double th1 = 1.0 - th;
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
    }
    return y;
  }
};

struct StepControls {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-13;
  double h_max = std::numeric_limits<double>::infinity();
};

namespace tableau {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace tableau

/// Result of one trial step.
template <std::size_t N>
struct Trial {
  bool ok = false;     ///< false if a stage left the right-hand side's domain
  double err = 0.0;    ///< scaled RMS error estimate (accept if <= 1)
  Vec<N> y1{};
  Vec<N> k7{};         ///< derivative at the new point (FSAL)
  DenseStep<N> dense{};
};

/// One Dormand-Prince trial step from (s, y) with derivative k1.
/// `rhs(s, y, dy)` may throw DomainError; the trial is then marked not ok.
template <std::size_t N, class Rhs>
Trial<N> dopri5_trial(Rhs&& rhs, double s, const Vec<N>& y, const Vec<N>& k1, double h,
                      const StepControls& ctl) {
  using namespace tableau;
  Trial<N> out;
  Vec<N> k2, k3, k4, k5, k6, k7, tmp;
  auto stage = [&](auto&& combine, double c, Vec<N>& k) {
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
    rhs(s + c * h, tmp, k);
  };
  try {
    stage([&](std::size_t i) { return a21 * k1[i]; }, c2, k2);
    stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }, c3, k3);
    stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }, c4, k4);
    stage([&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; }, c5, k5);
    stage([&](std::size_t i) { return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]; },
          1.0, k6);
    for (std::size_t i = 0; i < N; ++i) {
      out.y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    rhs(s + h, out.y1, k7);
  } catch (const DomainError&) {
    return out;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = ctl.atol + ctl.rtol * std::max(std::abs(y[i]), std::abs(out.y1[i]));
    sum += (e / sc) * (e / sc);
  }
  out.err = std::sqrt(sum / static_cast<double>(N));
  if (!std::isfinite(out.err)) return out;
  out.ok = true;
  out.k7 = k7;

  auto& r = out.dense.r;
  out.dense.s0 = s;
  out.dense.h = h;
  for (std::size_t i = 0; i < N; ++i) {
    const double ydiff = out.y1[i] - y[i];
    const double bspl = h * k1[i] - ydiff;
    r[0][i] = y[i];
    r[1][i] = ydiff;
    r[2][i] = bspl;
    r[3][i] = ydiff - h * k7[i] - bspl;
    r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
  }
  return out;
}

/// Step-size update after a trial with scaled error `err`.
inline double next_step(double h, double err, bool accepted) {
  if (err == 0.0) return h * 5.0;
  double fac = 0.9 * std::pow(err, -0.2);
  fac = std::clamp(fac, 0.2, accepted ? 5.0 : 1.0);
  return h * fac;
}

/// Integrates y' = rhs(s, y) from s0 to s1 and returns the states at the
/// requested output points (ascending, inside [s0, s1]).
template <std::size_t N, class Rhs>
std::vector<Vec<N>> integrate_to(Rhs&& rhs, double s0, double s1, Vec<N> y,
                                 const std::vector<double>& outputs, StepControls ctl = {}) {
  std::vector<Vec<N>> result;
  result.reserve(outputs.size());
  std::size_t next_out = 0;
  while (next_out < outputs.size() && outputs[next_out] <= s0) {
    result.push_back(y);
    ++next_out;
  }
  Vec<N> k1;
  rhs(s0, y, k1);
  double s = s0;
  double h = std::min(ctl.h_init, s1 - s0);
  while (s < s1 && next_out < outputs.size()) {
    h = std::min({h, s1 - s, ctl.h_max});
    const Trial<N> tr = dopri5_trial<N>(rhs, s, y, k1, h, ctl);
    if (!tr.ok || tr.err > 1.0) {
      h = tr.ok ? next_step(h, tr.err, false) : 0.25 * h;
      if (h < ctl.h_min) throw Error("integrate_to: step size underflow");
      continue;
    }
    const double s_new = s + h;
    while (next_out < outputs.size() && outputs[next_out] <= s_new) {
      result.push_back(tr.dense.eval(outputs[next_out]));
      ++next_out;
    }
    s = s_new;
    y = tr.y1;
    k1 = tr.k7;
    h = next_step(h, tr.err, true);
  }
  return result;
}

}  // namespace weingarten::ode
