#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "weingarten/classify.hpp"
#include "weingarten/linearcmp.hpp"

using namespace weingarten;
constexpr double pi = std::numbers::pi;

TEST(BetaReal, MinusOneClosedForm) {
  EXPECT_NEAR(beta_real(-1.0, 1.0), 2.0 - std::sqrt(2.0), 1e-14);
  for (int i = 0; i <= 60; ++i) {
    const double y = 1e-3 * std::pow(1e4, i / 60.0);
    EXPECT_NEAR(beta_real(-1.0, y), oracle::beta_m1(y), 1e-10) << y;
  }
}

TEST(BetaReal, SmallYLimit) {
  for (double M : {-0.5, -1.0, -2.0, -4.0}) {
    const double lim = 2.0 / (1.0 - M);
    EXPECT_LT(std::abs(beta_real(M, 1e-3) - lim), 1e-4) << M;
    for (double y : {1e-3, 1e-2, 0.05}) EXPECT_LE(std::abs(beta_real(M, y) - lim), 10 * y * y * (1 - M)) << M << " " << y;
  }
  EXPECT_NEAR(beta_real(-2.0, 1e-3), 2.0 / 3.0, 1e-6);
}

TEST(BetaReal, SimpsonOracle) {
  for (double M : {-0.3, -0.5, -1.0, -1.7, -2.0, -3.3, -4.0}) {
    for (double y : {0.05, 0.3, 1.0, 2.0, 5.0}) {
      const double ref = oracle::beta_simpson(M, y);
      EXPECT_NEAR(beta_real(M, y), ref, 1e-9 * std::max(1.0, std::abs(ref))) << M << " " << y;
    }
  }
}

TEST(BetaReal, Errors) {
  EXPECT_THROW(beta_real(0.5, 1.0), OutOfRange);
  EXPECT_THROW(beta_real(-1.0, 0.0), OutOfRange);
  EXPECT_THROW(explicit_lambda({-1.0, 0.0, 0.0}, -1.0), OutOfRange);
  EXPECT_THROW(fit_constant(-1.0, 0.0, 0.0, 1.0), OutOfRange);
}

TEST(ExplicitLambda, ZeroConstantTendsToAlpha) {
  for (double M : {-0.5, -1.0, -3.0}) {
    const auto lr = LinearRelation::through_umbilic(M, 0.8);
    EXPECT_NEAR(lr.alpha(), 0.8, 1e-15);
    EXPECT_NEAR(lr(0.8), 0.8, 1e-15);
    EXPECT_NEAR(explicit_lambda({M, lr.A, 0.0}, 1e-4), 0.8, 1e-7);
  }
}

TEST(ExplicitLambda, OdeResidual) {
  oracle::Rng rng(41);
  for (int i = 0; i < 30; ++i) {
    const LinearOrbit o{rng.uniform(-4.0, -0.3), rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 1.0)};
    for (double y : {0.01, 0.1, 0.5, 1.0, 2.0}) {
      const double scale = std::max(1.0, std::abs(explicit_lambda(o, y)) / y);
      EXPECT_LT(std::abs(linear_ode_residual(o, y)), 1e-8 * scale) << o.M << " " << y;
    }
  }
}

TEST(ExplicitLambda, AgreesWithRk4) {
  oracle::Rng rng(42);
  for (int i = 0; i < 10; ++i) {
    const LinearOrbit o{rng.uniform(-4.0, -0.3), rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 1.0)};
    auto f = [&](double l) { return o.M * l + o.A; };
    const double l0 = explicit_lambda(o, 0.01);
    for (double y : {0.1, 1.0, 2.0}) {
      const double ref = oracle::rk4_lambda(f, 0.01, l0, y, 200000);
      EXPECT_NEAR(explicit_lambda(o, y), ref, 1e-8 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(FitConstant, RoundTripAndLinearity) {
  oracle::Rng rng(43);
  for (int i = 0; i < 20; ++i) {
    const double M = rng.uniform(-4.0, -0.3), A = rng.uniform(-2.0, 2.0);
    const double y0 = rng.uniform(0.05, 3.0), l0 = rng.uniform(-5.0, 5.0);
    const auto o = fit_constant(M, A, y0, l0);
    EXPECT_NEAR(explicit_lambda(o, y0), l0, 1e-12 * std::max(1.0, std::abs(l0)));
    const auto o2 = fit_constant(M, A, y0, l0 + 1.0);
    EXPECT_GT(o2.C, o.C);  // lambda is increasing in C
    for (double y : {0.01, 0.5, 2.0}) EXPECT_GT(explicit_lambda(o2, y), explicit_lambda(o, y));
  }
}

TEST(ExplicitLambda, BlowsUpFasterThanOneOverY) {
  const LinearOrbit o{-1.5, 0.5, 0.3};
  double prev = 0.0;
  for (double y : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double yl = y * explicit_lambda(o, y);
    EXPECT_GT(yl, prev);
    prev = yl;
  }
  EXPECT_GT(prev, 1e3);
}

TEST(Envelope, AffineRelationSitsOnItsEnvelope) {
  for (double m : {-0.5, -1.0, -2.0}) {
    const auto rel = affine_relation(0.6, m);
    const FoldedRelation f(rel);
    IntegratorControls c;
    c.rtol = 1e-13;
    c.atol = 1e-15;
    const Orbit o = integrate({0.0, 0.7, 0.0, 0.9}, f, c);
    const auto branches = detail::descending_branches(o, rel.alpha());
    ASSERT_FALSE(branches.empty());
    const auto [a, b] = branches.front();
    const auto rep = envelope_report(f, detail::slice_orbit(o, a, b), m, m, o.samples[a].phase());
    EXPECT_TRUE(rep.pass) << m << " worst " << rep.worst_excess;
    for (const auto& s : rep.samples) EXPECT_EQ(s.lower, s.upper);
  }
}

TEST(Envelope, TanhSandwich) {
  const auto rel = tanh_relation(0.7, 1.5, 5.0 / 3.0);
  ASSERT_TRUE(rel.ellipticity());
  EXPECT_NEAR(rel.ellipticity()->lower, -3.5, 1e-12);
  EXPECT_NEAR(rel.ellipticity()->upper, -1.5, 1e-12);
  const FoldedRelation f(rel);
  int checked = 0;
  for (const auto& st : Sweep::grid(6, 6).starts) {
    const Orbit o = integrate(st, f);
    for (const auto& [a, b] : detail::descending_branches(o, rel.alpha())) {
      const auto rep = envelope_report(f, detail::slice_orbit(o, a, b), -3.5, -1.5, o.samples[a].phase());
      EXPECT_TRUE(rep.pass) << rep.worst_excess;
      for (const auto& s : rep.samples) {
        const double tol = 1e-9 * std::max(1.0, std::abs(s.lambda));
        EXPECT_LE(s.lower, s.lambda + tol);
        EXPECT_LE(s.lambda, s.upper + tol);
        EXPECT_LE(s.lower, s.upper + 1e-12 * std::max(1.0, std::abs(s.upper)));  // equal at the anchor
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 5);
}

TEST(Envelope, ViolationDetected) {
  const auto rel = tanh_relation(0.7, 1.5, 1.0);
  const FoldedRelation f(rel);
  const Orbit o = integrate({0.0, 0.7, 0.0, 0.9}, f);
  const auto branches = detail::descending_branches(o, rel.alpha());
  ASSERT_FALSE(branches.empty());
  const auto [a, b] = branches.front();
  // Slopes that do not bound f cannot sandwich the orbit.
  EXPECT_THROW(envelope_check(f, detail::slice_orbit(o, a, b), -0.5, -0.4, o.samples[a].phase()), EnvelopeViolation);
  EXPECT_THROW(envelope_report(f, o, -3.0, -1.0, {pi / 2 + 0.1, 0.0}), DomainError);
}

TEST(Envelope, FittedConstantsOffTheCanonicalOrbitAreNonZero) {
  // Only the orbit through the umbilic point has C = 0; sweep branches that
  // descend towards the axis never do.
  const auto rel = tanh_relation(0.7, 1.5, 1.0);
  const FoldedRelation f(rel);
  const SlopeBounds sb = *rel.ellipticity();
  int fitted = 0;
  for (const auto& st : Sweep::grid().starts) {
    const Orbit o = integrate(st, f);
    for (const auto& [a, b] : detail::descending_branches(o, rel.alpha())) {
      const auto rep = envelope_report(f, detail::slice_orbit(o, a, b), sb.lower, sb.upper, o.samples[a].phase());
      EXPECT_GT(std::abs(rep.upper_orbit.C), 1e-8);
      EXPECT_GT(std::abs(rep.lower_orbit.C), 1e-8);
      ++fitted;
    }
  }
  EXPECT_GT(fitted, 10);
}
