#include "starqc/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "expected.hpp"

using namespace starqc;

namespace {

Expr norm_sq_expr() {
  // ||x||^2 on [-1,1]^2 as a sum of certified quadratic atoms
  Certificate claim({0.0}, 2.0, Orientation::star_quasiconvex, Provenance::claimed());
  Expr a = make_scalar_atom([](double t) { return t * t; }, Interval(-1, 1), claim, "t^2");
  Expr b = make_scalar_atom([](double t) { return t * t; }, Interval(-1, 1), claim, "t^2");
  return sum({a, b}, ProductDomain({BoxDomain({Interval(-1, 1)}),
                                    BoxDomain({Interval(-1, 1)})}));
}

Expr neg_norm_sq_claimed_convex() {
  // -||x||^2 with a deliberately false star-qcx claim at the maximizer
  Certificate lie({0.0, 0.0}, 0.0, Orientation::star_quasiconvex, Provenance::claimed());
  return make_atom([](std::span<const double> x) { return -(x[0] * x[0] + x[1] * x[1]); },
                   BoxDomain({Interval(-1, 1), Interval(-1, 1)}), lie, "-|x|^2",
                   /*trusted=*/true);
}

Expr ln_with_false_modulus() {
  Certificate lie({1.0}, 1.0, Orientation::star_quasiconvex, Provenance::claimed());
  return make_scalar_atom([](double t) { return std::log(t); }, Interval(1, 3), lie, "ln",
                          /*trusted=*/true);
}

void expect_invariant(const VerificationReport& r) {
  EXPECT_EQ(r.passed, r.worst_slack >= -r.tolerance);
  EXPECT_EQ(r.passed, !r.witness.has_value());
}

}  // namespace

TEST(StarCheck, SoundCertificatePasses) {
  StarCheckOptions opt;
  opt.n_points = 200;
  VerificationReport r = check_star_inequality(norm_sq_expr(), opt);
  EXPECT_TRUE(r.passed);
  EXPECT_FALSE(r.witness.has_value());
  EXPECT_EQ(r.samples_used, 200u * 21u);
  EXPECT_GE(r.worst_slack, -r.tolerance);
  EXPECT_EQ(r.property, "star_inequality");
  expect_invariant(r);
}

TEST(StarCheck, FalseModulusFailsAtThePinnedCell) {
  StarCheckOptions opt;
  opt.n_points = 100;
  VerificationReport r = check_star_inequality(ln_with_false_modulus(), opt);
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.witness.has_value());
  // first witness in scan order: corner y=3, midpoint lambda
  EXPECT_EQ(r.witness->y, (Point{3.0}));
  EXPECT_EQ(r.witness->lambda, 0.5);
  EXPECT_DOUBLE_EQ(r.witness->lhs, expected::ln_claim_witness_lhs);
  EXPECT_DOUBLE_EQ(r.witness->rhs, expected::ln_claim_witness_rhs);
  expect_invariant(r);
}

TEST(StarCheck, DeterministicAndParallelConsistent) {
  StarCheckOptions serial;
  serial.n_points = 500;
  serial.seed = 11;
  StarCheckOptions parallel = serial;
  parallel.n_workers = 4;
  VerificationReport a = check_star_inequality(norm_sq_expr(), serial);
  VerificationReport b = check_star_inequality(norm_sq_expr(), serial);
  VerificationReport c = check_star_inequality(norm_sq_expr(), parallel);
  EXPECT_EQ(a.worst_slack, b.worst_slack);
  EXPECT_EQ(a.worst_slack, c.worst_slack);
  EXPECT_EQ(a.samples_used, c.samples_used);
  EXPECT_EQ(a.tolerance, c.tolerance);
  EXPECT_EQ(a.seed, c.seed);

  VerificationReport d = check_star_inequality(ln_with_false_modulus(), serial);
  VerificationReport e = check_star_inequality(ln_with_false_modulus(), parallel);
  ASSERT_TRUE(d.witness.has_value());
  ASSERT_TRUE(e.witness.has_value());
  EXPECT_EQ(d.witness->y, e.witness->y);
  EXPECT_EQ(d.witness->lambda, e.witness->lambda);
}

TEST(SublevelCheck, StarShapedSetsPass) {
  SublevelOptions opt;
  opt.deltas = {0.25, 0.5, 1.5};
  VerificationReport r = check_sublevel_star(norm_sq_expr(), opt);
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.samples_used, 0u);
  expect_invariant(r);
}

TEST(SublevelCheck, CatchesWrongCenter) {
  SublevelOptions opt;
  opt.deltas = {-0.5};
  VerificationReport r = check_sublevel_star(neg_norm_sq_claimed_convex(), opt);
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.witness.has_value());
  // the segment from the claimed center exits {h <= -0.5}
  EXPECT_GT(r.witness->lhs, -0.5);
  expect_invariant(r);
}

TEST(SublevelCheck, AutoDeltasFromQuantiles) {
  SublevelOptions opt;  // no deltas: value quantiles of a 256-point sample
  VerificationReport r = check_sublevel_star(norm_sq_expr(), opt);
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.samples_used, 0u);
}

TEST(RayCheck, FullLinesCatchInteriorMaximum) {
  // along any forward ray from the origin -|x|^2 is monotone (quasiconvex);
  // only the full line through the center exposes the interior maximum
  VerificationReport r = check_ray_quasiconvex(neg_norm_sq_claimed_convex());
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.witness.has_value());
  expect_invariant(r);
}

TEST(RayCheck, QuasiconvexRestrictionsPass) {
  VerificationReport r = check_ray_quasiconvex(norm_sq_expr());
  EXPECT_TRUE(r.passed);
  expect_invariant(r);
}

TEST(ConcaveOrientation, MirrorsAllChecks) {
  Certificate truth({0.0, 0.0}, 0.0, Orientation::star_quasiconcave, Provenance::claimed());
  Expr e = make_atom([](std::span<const double> x) { return -(x[0] * x[0] + x[1] * x[1]); },
                     BoxDomain({Interval(-1, 1), Interval(-1, 1)}), truth, "-|x|^2");
  EXPECT_TRUE(check_star_inequality(e).passed);
  SublevelOptions sopt;
  sopt.deltas = {-0.5, -0.1};
  EXPECT_TRUE(check_sublevel_star(e, sopt).passed);
  EXPECT_TRUE(check_ray_quasiconvex(e).passed);
  EXPECT_TRUE(falsify_minimizer(e).passed);  // center is the maximizer, as claimed
}

TEST(FalsifyQuasiconvex, FindsGeometricMeanWitness) {
  BoxDomain box({Interval(1, 4), Interval(1, 4)});
  Objective h = [](const Point& p) { return std::sqrt(p[0] * p[1]); };
  VerificationReport r = falsify_quasiconvex(h, box);
  EXPECT_FALSE(r.passed);  // a violation was found
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(r.witness->x, (Point{4.0, 1.0}));
  EXPECT_EQ(r.witness->y, (Point{1.0, 4.0}));
  EXPECT_EQ(r.witness->lambda, 0.5);
  EXPECT_DOUBLE_EQ(r.witness->lhs, expected::geomean_witness_mid);
  EXPECT_DOUBLE_EQ(r.witness->rhs, expected::geomean_witness_max);
  expect_invariant(r);
}

TEST(FalsifyQuasiconvex, ConvexFunctionYieldsNoWitness) {
  BoxDomain box({Interval(1, 4), Interval(1, 4)});
  Objective h = [](const Point& p) { return p[0] + p[1]; };
  VerificationReport r = falsify_quasiconvex(h, box);
  EXPECT_TRUE(r.passed);
  EXPECT_FALSE(r.witness.has_value());
}

TEST(FalsifyMinimizer, FindsBetterPoint) {
  VerificationReport r = falsify_minimizer(neg_norm_sq_claimed_convex());
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(r.witness->lambda, 1.0);
  EXPECT_EQ(r.witness->lhs, 0.0);          // h at the claimed center
  EXPECT_LT(r.witness->rhs, r.witness->lhs);  // strictly better sample
  expect_invariant(r);

  EXPECT_TRUE(falsify_minimizer(norm_sq_expr()).passed);
}

TEST(CrossCheck, AgreesOnSoundAndOnFalse) {
  CrossCheckOptions opt;
  opt.star.n_points = 300;
  CrossCheckResult good = cross_check_characterizations(norm_sq_expr(), opt);
  EXPECT_TRUE(good.agree);
  EXPECT_TRUE(good.star.passed);
  EXPECT_TRUE(good.sublevel.passed);
  EXPECT_TRUE(good.ray.passed);

  CrossCheckResult bad = cross_check_characterizations(neg_norm_sq_claimed_convex(), opt);
  EXPECT_TRUE(bad.agree);
  EXPECT_FALSE(bad.star.passed);
  EXPECT_FALSE(bad.sublevel.passed);
  EXPECT_FALSE(bad.ray.passed);
}

TEST(CrossCheck, GeometricChecksAreModulusBlind) {
  // the gamma=1 claim is false, but ln is star-qcx (gamma=0), so the
  // geometric characterizations pass and the cross-check compares them
  // against the modulus-free star property
  CrossCheckResult res = cross_check_characterizations(ln_with_false_modulus());
  EXPECT_TRUE(res.agree);
  EXPECT_TRUE(res.star.passed);
  EXPECT_TRUE(res.sublevel.passed);
  EXPECT_TRUE(res.ray.passed);
  // the direct check still fails the claimed modulus
  EXPECT_FALSE(check_star_inequality(ln_with_false_modulus()).passed);
}

TEST(MergeReports, OrderedMergeKeepsFirstWitness) {
  VerificationReport a;
  a.property = "star_inequality";
  a.samples_used = 10;
  a.worst_slack = 0.5;
  a.tolerance = 1e-9;
  VerificationReport b = a;
  b.worst_slack = -0.2;
  b.witness = Witness{{0.0}, {1.0}, 0.5, 1.0, 0.8};
  b.passed = false;

  VerificationReport ab = merge_reports(a, b);
  EXPECT_FALSE(ab.passed);
  EXPECT_EQ(ab.samples_used, 20u);
  EXPECT_EQ(ab.worst_slack, -0.2);
  ASSERT_TRUE(ab.witness.has_value());
  EXPECT_EQ(ab.witness->lambda, 0.5);

  VerificationReport c = a;
  c.witness = Witness{{0.0}, {2.0}, 0.25, 2.0, 1.5};
  c.worst_slack = -0.1;
  c.passed = false;
  VerificationReport cb = merge_reports(c, b);
  EXPECT_EQ(cb.witness->y, (Point{2.0}));  // earlier partition wins
  EXPECT_EQ(cb.worst_slack, -0.2);         // but worst is global

  VerificationReport other;
  other.property = "quasiconvex_pairs";
  EXPECT_THROW(merge_reports(a, other), std::invalid_argument);
}
