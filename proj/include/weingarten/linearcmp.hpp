// Affine relations f(r) = M r + A solved in closed form, and the comparison
// envelopes they provide for uniformly elliptic relations.
//
// With y = tan x the orbit equation becomes
//
//   lambda'(y) = (f(lambda) / (1 + y^2) - lambda) / y,
//
// whose solution for affine f is
//
//   lambda(y) = 1/2 (1 + y^2)^(-M/2) (A R_M(y) + 2 C y^(M-1)),
//   R_M(y)    = y^(M-1) int_0^{y^2} s^(-(M+1)/2) (1 + s)^(M/2 - 1) ds.
//
// R_M is the real form of (-y^2)^((M-1)/2) B(-y^2; (1-M)/2, M/2); the sign
// factors cancel, so everything stays in real arithmetic.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "weingarten/dual.hpp"
#include "weingarten/errors.hpp"
#include "weingarten/integrator.hpp"
#include "weingarten/quadrature.hpp"
#include "weingarten/relation.hpp"

namespace weingarten {

/// R_M(y) for M < 0, y > 0.
///
/// Computed in the scaled variable u = s / y^2, where
/// R_M(y) = int_0^1 u^(a-1) (1 + y^2 u)^(b-1) du with a = (1-M)/2, b = M/2.
/// The piece with y^2 u <= 1e-4 uses the binomial series of the smooth
/// factor against the exact u^(a-1) weight; the rest uses adaptive G7/K15,
/// after the substitution v = u^a when the weight is singular (a < 1).
inline double beta_real(double M, double y) {
  if (!(M < 0.0)) throw OutOfRange("beta_real: M must be negative");
  if (!(y > 0.0)) throw OutOfRange("beta_real: y must be positive");
  const double a = 0.5 * (1.0 - M);
  const double bm1 = 0.5 * M - 1.0;
  const double y2 = y * y;
  const double us = std::min(1.0, 1e-4 / y2);

  // Series: sum_k binom(b-1, k) y^(2k) us^(a+k) / (a+k).
  double series = 0.0;
  {
    double coef = 1.0;
    double zpow = 1.0;
    const double z = y2 * us;
    for (int k = 0; k < 200; ++k) {
      const double term = coef * zpow / (a + k);
      series += term;
      if (std::abs(term) <= 1e-18 * std::abs(series)) break;
      coef *= (bm1 - k) / (k + 1.0);
      zpow *= z;
    }
    series *= std::pow(us, a);
  }
  if (us >= 1.0) return series;

  double tail;
  if (a < 1.0) {
    auto integrand = [&](double v) { return std::pow(1.0 + y2 * std::pow(v, 1.0 / a), bm1) / a; };
    tail = quad::integrate(integrand, std::pow(us, a), 1.0, 0.0, 1e-14).value;
  } else {
    auto integrand = [&](double u) { return std::pow(u, a - 1.0) * std::pow(1.0 + y2 * u, bm1); };
    tail = quad::integrate(integrand, us, 1.0, 0.0, 1e-14).value;
  }
  return series + tail;
}

/// dR_M/dy = ((M-1) R_M + 2 (1 + y^2)^(M/2 - 1)) / y.
inline double beta_real_derivative(double M, double y, double R) {
  return ((M - 1.0) * R + 2.0 * std::pow(1.0 + y * y, 0.5 * M - 1.0)) / y;
}

/// f(r) = M r + A with f(alpha) = alpha.
struct LinearRelation {
  double M = -1.0;
  double A = 0.0;

  static LinearRelation through_umbilic(double M, double alpha) { return {M, alpha * (1.0 - M)}; }
  double alpha() const { return A / (1.0 - M); }
  double operator()(double r) const { return M * r + A; }
};

/// Explicit solution of the affine orbit equation with constant C.
struct LinearOrbit {
  double M = -1.0;
  double A = 0.0;
  double C = 0.0;
};

/// (lambda(y), lambda'(y)) of the explicit affine solution.
inline Dual explicit_lambda_dual(const LinearOrbit& o, double y) {
  if (!(y > 0.0)) throw OutOfRange("explicit_lambda: y must be positive");
  const double R = beta_real(o.M, y);
  const Dual yy = Dual::variable(y);
  const Dual Rd{R, beta_real_derivative(o.M, y, R)};
  const Dual one = Dual::constant(1.0);
  const Dual pre = pow(one + yy * yy, -0.5 * o.M);
  return Dual::constant(0.5) * pre * (Dual::constant(o.A) * Rd + Dual::constant(2.0 * o.C) * pow(yy, o.M - 1.0));
}

inline double explicit_lambda(const LinearOrbit& o, double y) { return explicit_lambda_dual(o, y).value; }

/// The LinearOrbit through (y0, lambda0); the equation is linear in C.
inline LinearOrbit fit_constant(double M, double A, double y0, double lambda0) {
  if (!(y0 > 0.0)) throw OutOfRange("fit_constant: y0 must be positive");
  const double R = beta_real(M, y0);
  const double C = (2.0 * lambda0 * std::pow(1.0 + y0 * y0, 0.5 * M) - A * R) / (2.0 * std::pow(y0, M - 1.0));
  return {M, A, C};
}

/// Residual of the orbit equation for an explicit affine solution.
inline double linear_ode_residual(const LinearOrbit& o, double y) {
  const Dual l = explicit_lambda_dual(o, y);
  const double f = o.M * l.value + o.A;
  return l.deriv - (f / (1.0 + y * y) - l.value) / y;
}

struct EnvelopeSample {
  double y = 0.0;
  double lambda = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct EnvelopeReport {
  LinearOrbit upper_orbit;  ///< built from the lower linear bound of f
  LinearOrbit lower_orbit;  ///< built from the upper linear bound of f
  std::vector<EnvelopeSample> samples;
  double worst_excess = -std::numeric_limits<double>::infinity();  ///< max violation over max(1, |lambda|)
  double worst_y = 0.0;
  int side_violations = 0;  ///< samples on the other side of alpha than the anchor
  bool pass = false;
};

/// Sandwich of an orbit between the explicit affine solutions through an
/// anchor point.
///
/// For lambda > alpha, f lies between the lines of slope lambda1 and lambda2
/// through (alpha, alpha); below alpha (where f = g^-1) the slopes are
/// 1/lambda1 and 1/lambda2. The line with the smaller f gives the upper
/// envelope. Every orbit sample with 0 < tan x <= tan x0 on the anchor's
/// side of alpha must satisfy lower - slack <= lambda <= upper + slack, with
/// the slack scaled by max(1, |lambda|) so that equality cases (affine f)
/// are not failed by relative integration error where lambda blows up.
inline EnvelopeReport envelope_report(const FoldedRelation& f, const Orbit& orbit, double lambda1, double lambda2,
                                      PhasePoint anchor, double slack = 1e-9) {
  constexpr double pi = std::numbers::pi;
  if (!(anchor.x > 0.0 && anchor.x < pi / 2)) throw DomainError("envelope anchor must lie in R0");
  const double alpha = f.alpha();
  if (anchor.lambda == alpha) throw DomainError("envelope anchor on lambda = alpha");
  const bool above = anchor.lambda > alpha;
  const double m_up = above ? lambda1 : 1.0 / lambda1;
  const double m_lo = above ? lambda2 : 1.0 / lambda2;
  const double y0 = std::tan(anchor.x);

  EnvelopeReport rep;
  rep.upper_orbit = fit_constant(m_up, alpha * (1.0 - m_up), y0, anchor.lambda);
  rep.lower_orbit = fit_constant(m_lo, alpha * (1.0 - m_lo), y0, anchor.lambda);
  for (const auto& st : orbit.samples) {
    if (!(st.x > 0.0 && st.x <= anchor.x)) continue;
    const double y = std::tan(st.x);
    const double lam = st.lambda();
    if ((lam > alpha) != above) {
      ++rep.side_violations;
      continue;
    }
    EnvelopeSample es{y, lam, explicit_lambda(rep.lower_orbit, y), explicit_lambda(rep.upper_orbit, y)};
    const double excess = std::max(es.lower - lam, lam - es.upper) / std::max(1.0, std::abs(lam));
    if (excess > rep.worst_excess) {
      rep.worst_excess = excess;
      rep.worst_y = y;
    }
    rep.samples.push_back(es);
  }
  rep.pass = rep.side_violations == 0 && !rep.samples.empty() && rep.worst_excess <= slack;
  return rep;
}

/// envelope_report that throws EnvelopeViolation on failure.
inline EnvelopeReport envelope_check(const FoldedRelation& f, const Orbit& orbit, double lambda1, double lambda2,
                                     PhasePoint anchor, double slack = 1e-9) {
  EnvelopeReport rep = envelope_report(f, orbit, lambda1, lambda2, anchor, slack);
  if (!rep.pass) {
    throw EnvelopeViolation("envelope violated by " + std::to_string(rep.worst_excess) + " at y = " +
                            std::to_string(rep.worst_y) + " (" + std::to_string(rep.side_violations) +
                            " samples across alpha)");
  }
  return rep;
}

}  // namespace weingarten
