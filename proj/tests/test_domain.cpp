#include "starqc/domain.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace starqc;

TEST(Interval, ValidatesBounds) {
  EXPECT_THROW(Interval(2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Interval(0.0, std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_THROW(Interval(std::nan(""), 1.0), std::invalid_argument);
  Interval iv(-1.0, 3.0);
  EXPECT_DOUBLE_EQ(iv.width(), 4.0);
  EXPECT_TRUE(iv.contains(-1.0));
  EXPECT_TRUE(iv.contains(3.0));
  EXPECT_FALSE(iv.contains(3.0000001));
  EXPECT_EQ(iv.clamp(5.0), 3.0);
  EXPECT_EQ(iv.clamp(-5.0), -1.0);
  EXPECT_EQ(iv.clamp(0.5), 0.5);
}

TEST(BoxDomain, MembershipAndClamp) {
  BoxDomain box({Interval(0.0, 1.0), Interval(-2.0, 2.0)});
  EXPECT_EQ(box.dimension(), 2u);
  EXPECT_TRUE(box.contains(Point{0.5, 0.0}));
  EXPECT_FALSE(box.contains(Point{1.5, 0.0}));
  EXPECT_THROW(box.contains(Point{0.5}), std::invalid_argument);

  // relative slack scales with max(1, |lo|, |hi|)
  Point edge{1.0 + 5e-13, 2.0 + 1e-12};
  EXPECT_FALSE(box.contains(edge));
  EXPECT_TRUE(box.contains_within(edge, 1e-12));
  EXPECT_FALSE(box.contains_within(Point{1.0 + 1e-6, 0.0}, 1e-12));

  Point clamped = box.clamp(Point{7.0, -9.0});
  EXPECT_EQ(clamped[0], 1.0);
  EXPECT_EQ(clamped[1], -2.0);
}

TEST(BoxDomain, ShrunkAndConcat) {
  BoxDomain box({Interval(0.0, 1.0)});
  BoxDomain inner = box.shrunk(1e-2);
  EXPECT_DOUBLE_EQ(inner.axis(0).lo, 0.01);
  EXPECT_DOUBLE_EQ(inner.axis(0).hi, 0.99);

  BoxDomain joined = BoxDomain::concat({box, BoxDomain({Interval(2.0, 3.0), Interval(4.0, 5.0)})});
  EXPECT_EQ(joined.dimension(), 3u);
  EXPECT_DOUBLE_EQ(joined.axis(2).lo, 4.0);
  EXPECT_THROW(BoxDomain(std::vector<Interval>{}), std::invalid_argument);
}

TEST(ProductDomain, BlocksFlatten) {
  ProductDomain dom({BoxDomain({Interval(0.0, 1.0)}),
                     BoxDomain({Interval(-1.0, 1.0), Interval(2.0, 4.0)})});
  EXPECT_EQ(dom.block_count(), 2u);
  EXPECT_EQ(dom.total_dimension(), 3u);
  auto dims = dom.block_dims();
  ASSERT_EQ(dims.size(), 2u);
  EXPECT_EQ(dims[0], 1u);
  EXPECT_EQ(dims[1], 2u);
  EXPECT_TRUE(dom.contains(Point{0.5, 0.0, 3.0}));
  EXPECT_FALSE(dom.contains(Point{0.5, 0.0, 5.0}));
}

TEST(Sample, CornersComeFirstInBinaryOrder) {
  BoxDomain box({Interval(0.0, 1.0), Interval(10.0, 20.0)});
  auto pts = sample(box, 6, 42);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[0], (Point{0.0, 10.0}));
  EXPECT_EQ(pts[1], (Point{1.0, 10.0}));  // bit 0 -> axis 0 hi
  EXPECT_EQ(pts[2], (Point{0.0, 20.0}));
  EXPECT_EQ(pts[3], (Point{1.0, 20.0}));
  for (const Point& p : pts) EXPECT_TRUE(box.contains(p));
}

TEST(Sample, SmallBudgetSkipsCorners) {
  BoxDomain box({Interval(0.0, 1.0), Interval(0.0, 1.0)});
  auto pts = sample(box, 3, 7);
  ASSERT_EQ(pts.size(), 3u);
  // budget below the corner count: pure seeded draws, still inside the box
  for (const Point& p : pts) EXPECT_TRUE(box.contains(p));
}

TEST(Sample, DeterministicPerSeed) {
  BoxDomain box({Interval(-3.0, 3.0), Interval(0.0, 1.0)});
  auto a = sample(box, 50, 123);
  auto b = sample(box, 50, 123);
  auto c = sample(box, 50, 124);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Sample, HighDimensionCapsCorners) {
  std::vector<Interval> axes(8, Interval(0.0, 1.0));
  BoxDomain box(axes);
  auto pts = sample(box, 80, 0);
  ASSERT_EQ(pts.size(), 80u);
  std::set<Point> seen;
  for (std::size_t k = 0; k < 64; ++k) {
    for (double v : pts[k]) EXPECT_TRUE(v == 0.0 || v == 1.0);
    seen.insert(pts[k]);
  }
  EXPECT_EQ(seen.size(), 64u);  // distinct corners
}

TEST(Segment, EndpointsAndValidation) {
  Point xbar{0.0, 0.0};
  Point y{2.0, -4.0};
  EXPECT_EQ(segment_point(xbar, y, 1.0), xbar);
  EXPECT_EQ(segment_point(xbar, y, 0.0), y);
  Point mid = segment_point(xbar, y, 0.5);
  EXPECT_DOUBLE_EQ(mid[0], 1.0);
  EXPECT_DOUBLE_EQ(mid[1], -2.0);
  EXPECT_THROW(segment_point(xbar, y, 1.5), std::invalid_argument);
  EXPECT_THROW(segment_point(xbar, y, -0.1), std::invalid_argument);
  EXPECT_THROW(segment_point(Point{0.0}, y, 0.5), std::invalid_argument);
}

TEST(Segment, SquaredDistance) {
  EXPECT_DOUBLE_EQ(squared_distance(Point{0.0, 0.0}, Point{3.0, 4.0}), 25.0);
  EXPECT_THROW(squared_distance(Point{0.0}, Point{1.0, 2.0}), std::invalid_argument);
}
