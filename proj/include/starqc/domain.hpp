#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace starqc {

using Point = std::vector<double>;

/// Closed bounded interval [lo, hi]. Open domains are handled by callers
/// shrinking the box inward (see BoxDomain::shrunk).
struct Interval {
  double lo{0.0};
  double hi{0.0};

  Interval() = default;
  Interval(double l, double h) : lo(l), hi(h) {
    if (!(std::isfinite(l) && std::isfinite(h)))
      throw std::invalid_argument("Interval: bounds must be finite");
    if (l > h) throw std::invalid_argument("Interval: lo > hi");
  }

  double width() const { return hi - lo; }
  bool contains(double t) const { return t >= lo && t <= hi; }
  double clamp(double t) const { return t < lo ? lo : (t > hi ? hi : t); }
};

/// Axis-aligned closed box, one Interval per coordinate.
class BoxDomain {
 public:
  BoxDomain() = default;
  explicit BoxDomain(std::vector<Interval> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw std::invalid_argument("BoxDomain: no axes");
  }

  std::size_t dimension() const { return axes_.size(); }
  const Interval& axis(std::size_t i) const { return axes_.at(i); }
  const std::vector<Interval>& axes() const { return axes_; }

  bool contains(std::span<const double> p) const {
    if (p.size() != axes_.size())
      throw std::invalid_argument("BoxDomain::contains: dimension mismatch");
    for (std::size_t i = 0; i < axes_.size(); ++i)
      if (!axes_[i].contains(p[i])) return false;
    return true;
  }
  bool contains(const Point& p) const {
    return contains(std::span<const double>(p));
  }

  /// Membership up to a per-axis slack of rel * max(1, |lo|, |hi|); used by
  /// evaluators so segment points that land a rounding error outside the box
  /// are not rejected.
  bool contains_within(std::span<const double> p, double rel) const {
    if (p.size() != axes_.size())
      throw std::invalid_argument("BoxDomain::contains_within: dimension mismatch");
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      const Interval& ax = axes_[i];
      double scale = std::max({1.0, std::abs(ax.lo), std::abs(ax.hi)});
      if (p[i] < ax.lo - rel * scale || p[i] > ax.hi + rel * scale) return false;
    }
    return true;
  }

  /// Clamp every coordinate into its interval.
  Point clamp(std::span<const double> p) const {
    Point out(p.begin(), p.end());
    for (std::size_t i = 0; i < axes_.size(); ++i) out[i] = axes_[i].clamp(out[i]);
    return out;
  }

  /// Box shrunk inward by margin_rel * width on each side. Approximates an
  /// open box by a slightly smaller closed one.
  BoxDomain shrunk(double margin_rel = 1e-8) const {
    std::vector<Interval> out;
    out.reserve(axes_.size());
    for (const Interval& ax : axes_) {
      double m = margin_rel * ax.width();
      out.emplace_back(ax.lo + m, ax.hi - m);
    }
    return BoxDomain(std::move(out));
  }

  /// Concatenate the axes of several boxes into one flat box.
  static BoxDomain concat(const std::vector<BoxDomain>& parts) {
    std::vector<Interval> axes;
    for (const BoxDomain& b : parts)
      axes.insert(axes.end(), b.axes_.begin(), b.axes_.end());
    return BoxDomain(std::move(axes));
  }

 private:
  std::vector<Interval> axes_;
};

/// Cartesian product of boxes; block i spans block_dims[i] coordinates of the
/// flattened point.
class ProductDomain {
 public:
  ProductDomain() = default;
  explicit ProductDomain(std::vector<BoxDomain> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw std::invalid_argument("ProductDomain: no blocks");
  }

  std::size_t block_count() const { return blocks_.size(); }
  const BoxDomain& block(std::size_t i) const { return blocks_.at(i); }
  const std::vector<BoxDomain>& blocks() const { return blocks_; }

  std::vector<std::size_t> block_dims() const {
    std::vector<std::size_t> dims;
    dims.reserve(blocks_.size());
    for (const BoxDomain& b : blocks_) dims.push_back(b.dimension());
    return dims;
  }

  std::size_t total_dimension() const {
    std::size_t n = 0;
    for (const BoxDomain& b : blocks_) n += b.dimension();
    return n;
  }

  BoxDomain flattened() const { return BoxDomain::concat(blocks_); }

  bool contains(const Point& p) const { return flattened().contains(p); }

 private:
  std::vector<BoxDomain> blocks_;
};

namespace detail {

// 53-bit mantissa fill; keeps sampling byte-identical across platforms
// instead of leaning on std::uniform_real_distribution.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t corner_count(std::size_t dim) {
  return dim >= 7 ? 64 : (std::size_t{1} << dim);
}

}  // namespace detail

/// Deterministic sample of n points from a box. When n is at least the corner
/// count (2^dim, capped at 64), the corners come first in binary order
/// (bit i of the index selects hi on axis i); the remainder is seeded
/// uniform. Identical (box, n, seed) always yields identical points.
inline std::vector<Point> sample(const BoxDomain& box, std::size_t n, std::uint64_t seed) {
  std::vector<Point> pts;
  pts.reserve(n);
  const std::size_t dim = box.dimension();
  const std::size_t corners = detail::corner_count(dim);
  if (n >= corners) {
    for (std::size_t k = 0; k < corners; ++k) {
      Point p(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        const Interval& ax = box.axis(i);
        p[i] = (i < 63 && ((k >> i) & 1u)) ? ax.hi : ax.lo;
      }
      pts.push_back(std::move(p));
    }
  }
  std::mt19937_64 rng(seed);
  while (pts.size() < n) {
    Point p(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const Interval& ax = box.axis(i);
      p[i] = ax.lo + detail::unit_double(rng) * ax.width();
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

inline std::vector<Point> sample(const ProductDomain& dom, std::size_t n, std::uint64_t seed) {
  return sample(dom.flattened(), n, seed);
}

/// lambda*xbar + (1-lambda)*y. The segment from y to the star center.
inline Point segment_point(const Point& xbar, const Point& y, double lambda) {
  if (xbar.size() != y.size())
    throw std::invalid_argument("segment_point: dimension mismatch");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("segment_point: lambda outside [0,1]");
  Point out(xbar.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = lambda * xbar[i] + (1.0 - lambda) * y[i];
  return out;
}

inline double squared_distance(const Point& a, const Point& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("squared_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace starqc
