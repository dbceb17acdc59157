#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "weingarten/relation.hpp"

using namespace weingarten;

namespace {

WeingartenRelation::Function affine_g(double alpha, double slope) {
  return [=](Dual x) { return Dual::constant(alpha) + Dual::constant(slope) * (x - Dual::constant(alpha)); };
}

WeingartenRelation inverse_relation() {
  RelationOptions opt;
  opt.alpha = 1.0;
  opt.b = 0.0;
  return dsl_relation("1/k", {}, opt);
}

}  // namespace

TEST(UmbilicalConstant, CmcFixedPoint) {
  const auto g = [](Dual x) { return Dual::constant(1.4) - x; };
  EXPECT_NEAR(find_umbilical_constant(g, -10, 10), 0.7, 1e-12);
}

TEST(UmbilicalConstant, InverseFixedPoint) {
  const auto g = [](Dual x) { return Dual::constant(1.0) / x; };
  EXPECT_NEAR(find_umbilical_constant(g, 0.1, 10), 1.0, 1e-12);
}

TEST(UmbilicalConstant, SlopeMinusTwo) {
  const auto g = [](Dual x) { return Dual::constant(1.0) - Dual::constant(2.0) * (x - Dual::constant(1.0)); };
  EXPECT_NEAR(find_umbilical_constant(g, -5, 5), 1.0, 1e-12);
}

TEST(UmbilicalConstant, NoSignChange) {
  const auto g = [](Dual x) { return Dual::constant(100.0) - x; };
  EXPECT_THROW(find_umbilical_constant(g, -5, 5), NoSignChange);
}

TEST(EstimateB, AffineUnbounded) { EXPECT_EQ(estimate_b(affine_relation(0.7, -1.0)), kNegInf); }

TEST(EstimateB, ExpAsymptote) {
  const auto rel = expasymptote_relation(1.0, -1.0);
  EXPECT_NEAR(rel.b(), -1.0, 1e-8);
  RelationOptions opt;
  opt.alpha = 1.0;
  const auto probed = make_relation([](Dual x) { return Dual::constant(-1.0) + Dual::constant(2.0) * exp((Dual::constant(1.0) - x) / Dual::constant(2.0)); }, opt);
  EXPECT_NEAR(probed.b(), -1.0, 1e-8);
  EXPECT_LT(probed.b(), probed.alpha());
}

TEST(EstimateB, UniformNeedsNoProbe) {
  const auto rel = tanh_relation(0.3, 2.0, 1.0);
  ASSERT_TRUE(rel.uniformly_elliptic());
  EXPECT_EQ(estimate_b(rel), kNegInf);
}

TEST(InvertG, Examples) {
  EXPECT_NEAR(invert_g(affine_relation(0.7, -1.0), 0.0), 1.4, 1e-12);
  EXPECT_NEAR(invert_g(inverse_relation(), 0.25), 4.0, 1e-10);
  RelationOptions opt;
  opt.bracket_lo = -5;
  opt.bracket_hi = 5;
  const auto rel = make_relation(affine_g(1.0, -2.0), opt);
  EXPECT_NEAR(invert_g(rel, -3.0), 3.0, 1e-12);
}

TEST(InvertG, OutOfRange) {
  const auto rel = inverse_relation();
  EXPECT_THROW(invert_g(rel, 1.5), OutOfRange);
  EXPECT_THROW(invert_g(rel, 0.0), OutOfRange);
  EXPECT_THROW(invert_g(rel, -1.0), OutOfRange);
}

TEST(Fold, FixedPointAndSlopes) {
  const FoldedRelation f(affine_relation(0.5, -0.5));
  EXPECT_DOUBLE_EQ(f(0.5), 0.5);
  EXPECT_NEAR(f.eval(2.0).deriv, -0.5, 1e-12);
  EXPECT_NEAR(f.eval(-1.0).deriv, -2.0, 1e-9);
}

TEST(Fold, CmcSelfInverse) {
  const FoldedRelation f(affine_relation(0.7, -1.0));
  for (double x : {-3.0, -0.2, 0.7, 1.3, 10.0}) EXPECT_NEAR(f(x), 1.4 - x, 1e-12);
}

TEST(Fold, InvolutionProperty) {
  oracle::Rng rng(11);
  for (const auto& rel : {tanh_relation(0.4, 1.5, 1.0), expasymptote_relation(1.0, -1.0), inverse_relation()}) {
    const FoldedRelation f(rel);
    for (int i = 0; i < 1000; ++i) {
      const double lo = rel.finite_b() ? rel.b() + 1e-3 : rel.alpha() - 20.0;
      const double x = rng.uniform(lo, rel.alpha() + 20.0);
      EXPECT_NEAR(f(f(x)), x, 1e-9 * (1.0 + std::abs(x))) << rel.description() << " at " << x;
    }
  }
}

TEST(Fold, DecreasingAndContinuousAtAlpha) {
  const FoldedRelation f(tanh_relation(0.2, 2.0, 1.0));
  const double a = f.alpha();
  EXPECT_NEAR(f(a - 1e-9), f(a + 1e-9), 1e-8);
  double prev = f(a - 5.0);
  for (double x = a - 5.0 + 0.01; x < a + 5.0; x += 0.01) {
    const double v = f(x);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(OrientationFlip, Cmc) {
  const auto flipped = orientation_flip(affine_relation(0.7, -1.0));
  EXPECT_NEAR(flipped.alpha(), -0.7, 1e-15);
  for (double x : {-0.7, 0.0, 2.0, 5.0}) EXPECT_NEAR(flipped(x), -1.4 - x, 1e-12);
}

TEST(OrientationFlip, InverseIsSelfDual) {
  const auto rel = inverse_relation();
  const auto flipped = orientation_flip(rel);
  EXPECT_NEAR(flipped.alpha(), -1.0, 1e-15);
  // -g^-1(-x) = -(1 / (-x)) = 1 / x on x < 0.
  for (double x : {-1.0, -0.5, -0.1}) EXPECT_NEAR(flipped(x), 1.0 / x, 1e-10);
}

TEST(OrientationFlip, DoubleFlipIsIdentity) {
  for (const auto& rel : {tanh_relation(0.3, 1.5, 1.0), affine_relation(-0.4, -2.5), expasymptote_relation(1.0, -1.0)}) {
    const auto back = orientation_flip(orientation_flip(rel));
    EXPECT_DOUBLE_EQ(back.alpha(), rel.alpha());
    for (int i = 0; i < 100; ++i) {
      const double x = rel.alpha() + 0.1 * i;
      EXPECT_NEAR(back(x), rel(x), 1e-10) << rel.description();
    }
  }
}

TEST(OrientationFlip, PreservesUniformity) {
  EXPECT_TRUE(orientation_flip(tanh_relation(0.3, 1.5, 1.0)).uniformly_elliptic());
  EXPECT_FALSE(orientation_flip(expasymptote_relation(1.0, -1.0)).uniformly_elliptic());
}

TEST(FiniteCut, NormalizedThroughFlip) {
  // g(x) = -1/x on [alpha, b_cut) with alpha = -1 and cut at 0.
  RelationOptions opt;
  opt.alpha = -1.0;
  opt.b = 0.0;
  opt.domain_case = DomainCase::FiniteCut;
  const auto rel = dsl_relation("1/k", {}, opt);
  EXPECT_EQ(rel.domain_case(), DomainCase::HalfLine);
  EXPECT_NEAR(rel.alpha(), 1.0, 1e-15);
  EXPECT_NEAR(rel.b(), 0.0, 1e-15);
  EXPECT_NEAR(rel(4.0), 0.25, 1e-10);
}

TEST(UniformEllipticity, Cmc) {
  const auto rep = validate_uniform_ellipticity(affine_relation(1.0, -1.0));
  EXPECT_TRUE(rep.uniform);
  EXPECT_DOUBLE_EQ(rep.lambda1, -1.0);
  EXPECT_DOUBLE_EQ(rep.lambda2, -1.0);
}

TEST(UniformEllipticity, InverseIsNotUniform) {
  const auto rep = validate_uniform_ellipticity(inverse_relation());
  EXPECT_FALSE(rep.uniform);
  EXPECT_GT(rep.lambda2, -1e-6);
  EXPECT_LT(rep.lambda2, 0.0);
}

TEST(UniformEllipticity, TanhFamilyAgainstDenseSampling) {
  // g(x) = alpha - (x - alpha)(2 + tanh(x - alpha)).
  const double alpha = 0.4;
  const auto rel = dsl_relation("a - (k - a)*(2 + tanh(k - a))", {{"a", alpha}});
  const auto rep = validate_uniform_ellipticity(rel);
  ASSERT_TRUE(rep.uniform);
  double lo = 0, hi = -1e300;
  for (int i = 0; i <= 200000; ++i) {
    const double u = 50.0 * i / 200000.0;
    const double d = -(2.0 + std::tanh(u)) - u / (std::cosh(u) * std::cosh(u));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  EXPECT_NEAR(rep.lambda1, lo, 1e-4);
  EXPECT_NEAR(rep.lambda2, hi, 1e-12);
  EXPECT_GE(rep.lambda1, -3.5);
  EXPECT_LE(rep.lambda2, -1.5);
}

TEST(UniformEllipticity, RejectsIncreasing) {
  EXPECT_THROW(dsl_relation("k^3 - 3*k + 1", {}), Error);
  RelationOptions opt;
  opt.alpha = 0.0;
  // g' vanishes only at the umbilic point; still rejected.
  EXPECT_THROW(dsl_relation("-k^3", {}, opt), NotElliptic);
}
