#include "starqc/scalar.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "expected.hpp"

using namespace starqc;

TEST(RangeInterval, WidenedIsMultiplicative) {
  RangeInterval r(1.0, 2.0);
  RangeInterval w = r.widened(1e-9);
  EXPECT_LT(w.lo, 1.0);
  EXPECT_GT(w.lo, 1.0 - 1e-8);
  EXPECT_GT(w.hi, 2.0);
  // a negative range stays negative after widening
  RangeInterval n(-2.0, -1.0);
  RangeInterval wn = n.widened(1e-9);
  EXPECT_LT(wn.lo, -2.0);
  EXPECT_GT(wn.hi, -1.0);
  EXPECT_LT(wn.hi, 0.0);
  EXPECT_THROW(RangeInterval(2.0, 1.0), std::invalid_argument);
}

// Accuracy targets for the finite-difference Dini estimator: 1% relative on
// curved transforms, 1e-6 absolute when the true infimum is 0 (flat piece).
TEST(DiniEstimate, HitsKnownInfima) {
  auto exp_est = estimate_dini_inf([](double t) { return std::exp(t); }, RangeInterval(0, 1));
  EXPECT_NEAR(exp_est.mu, expected::dini_exp_0_1, 0.01 * expected::dini_exp_0_1);

  auto ln_est = estimate_dini_inf([](double t) { return std::log(t); }, RangeInterval(1, 3));
  EXPECT_NEAR(ln_est.mu, expected::dini_ln_1_3, 0.01 * expected::dini_ln_1_3);

  auto sq_est = estimate_dini_inf([](double t) { return t * t; }, RangeInterval(1, 2));
  EXPECT_NEAR(sq_est.mu, expected::dini_sq_1_2, 0.01 * expected::dini_sq_1_2);

  auto flat = estimate_dini_inf([](double t) { return std::max(t, 1.0); }, RangeInterval(0, 2));
  EXPECT_NEAR(flat.mu, expected::dini_flat, 1e-6);
}

TEST(DiniEstimate, DegenerateAndInvalidInput) {
  auto est = estimate_dini_inf([](double t) { return t; }, RangeInterval(1.0, 1.0));
  EXPECT_EQ(est.mu, 0.0);
  EXPECT_THROW(
      estimate_dini_inf([](double) { return std::nan(""); }, RangeInterval(0, 1)),
      std::runtime_error);
  EXPECT_THROW(estimate_dini_inf([](double t) { return t; }, RangeInterval(0, 1), 1),
               std::invalid_argument);
}

TEST(InvertMonotone, SolvesBothDirections) {
  double x = invert_monotone([](double t) { return t * t * t; }, 8.0, RangeInterval(0, 3));
  EXPECT_NEAR(x, 2.0, 1e-10);
  // decreasing g
  double y = invert_monotone([](double t) { return 1.0 / t; }, 0.25, RangeInterval(1, 10));
  EXPECT_NEAR(y, 4.0, 1e-9);
  EXPECT_THROW(invert_monotone([](double t) { return t; }, 5.0, RangeInterval(0, 1)),
               std::invalid_argument);
}

TEST(MeanValue, ChecksSlope) {
  EXPECT_TRUE(mean_value_check([](double t) { return 2.0 * t; }, 0.0, 1.0, 2.0));
  EXPECT_TRUE(mean_value_check([](double t) { return 2.0 * t; }, 0.0, 1.0, 1.5));
  EXPECT_FALSE(mean_value_check([](double t) { return 2.0 * t; }, 0.0, 1.0, 2.5));
  EXPECT_THROW(mean_value_check([](double t) { return t; }, 1.0, 0.0, 1.0),
               std::invalid_argument);
}

TEST(Registry, AnalyticDiniFormulas) {
  EXPECT_DOUBLE_EQ(identity_transform().analytic_dini_inf(RangeInterval(-5, 5)), 1.0);
  EXPECT_DOUBLE_EQ(ln_transform().analytic_dini_inf(RangeInterval(1, 3)),
                   expected::compose_ln_mu_1_3);
  EXPECT_THROW(ln_transform().analytic_dini_inf(RangeInterval(-1, 1)), std::invalid_argument);
  EXPECT_DOUBLE_EQ(exp_transform().analytic_dini_inf(RangeInterval(0, 1)), 1.0);
  // p >= 1: infimum of p*t^(p-1) at the left end; p < 1: at the right end
  EXPECT_DOUBLE_EQ(power_transform(2.0).analytic_dini_inf(RangeInterval(1, 2)), 2.0);
  EXPECT_DOUBLE_EQ(power_transform(0.5).analytic_dini_inf(RangeInterval(1, 4)), 0.25);
  EXPECT_THROW(power_transform(0.0), std::invalid_argument);
}

TEST(Registry, MonotonicityTags) {
  EXPECT_EQ(ln_transform().monotonicity, Monotonicity::increasing);
  EXPECT_EQ(negate_transform().monotonicity, Monotonicity::decreasing);
  EXPECT_EQ(reciprocal_transform().monotonicity, Monotonicity::decreasing);
  EXPECT_EQ(power_transform(-1.0).monotonicity, Monotonicity::decreasing);
}

TEST(Registry, LookupAndInverse) {
  ScalarTransform ln = make_transform("ln");
  auto inv = registry_inverse(ln);
  ASSERT_TRUE(inv.has_value());
  EXPECT_NEAR(inv->eval(ln.eval(2.7)), 2.7, 1e-12);

  ScalarTransform pw = make_transform("power", 3.0);
  auto pinv = registry_inverse(pw, 3.0);
  ASSERT_TRUE(pinv.has_value());
  EXPECT_NEAR(pinv->eval(pw.eval(1.7)), 1.7, 1e-12);

  EXPECT_THROW(make_transform("nope"), std::invalid_argument);
  EXPECT_THROW(make_transform("power"), std::invalid_argument);
}
