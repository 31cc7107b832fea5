#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace starqc {

/// Closed interval of function values.
struct RangeInterval {
  double lo{0.0};
  double hi{0.0};

  RangeInterval() = default;
  RangeInterval(double l, double h) : lo(l), hi(h) {
    if (!(std::isfinite(l) && std::isfinite(h)) || l > h)
      throw std::invalid_argument("RangeInterval: need finite lo <= hi");
  }
  double width() const { return hi - lo; }

  /// Widened by rel * |bound| on each side; guards ranges screened from a
  /// finite grid. Multiplicative, so a positive lo stays positive.
  RangeInterval widened(double rel = 1e-9) const {
    return RangeInterval(lo - rel * std::abs(lo), hi + rel * std::abs(hi));
  }
};

enum class Monotonicity { increasing, decreasing };

/// A scalar map g used in compositions and quasi-arithmetic means.
///
/// dini_inf, when set, is a caller-supplied lower bound on the lower Dini
/// derivative of g over the range the caller intends to use; analytic_dini_inf,
/// when set, computes that infimum exactly for an arbitrary range (registry
/// transforms provide it). Without either, the toolkit falls back to the
/// finite-difference estimator below.
struct ScalarTransform {
  std::string name;
  std::function<double(double)> eval;
  Monotonicity monotonicity{Monotonicity::increasing};
  std::optional<double> dini_inf;
  std::function<double(const RangeInterval&)> analytic_dini_inf;

  double operator()(double t) const { return eval(t); }
};

struct DiniEstimate {
  double mu{0.0};
  bool is_analytic{false};
  std::size_t base_points{0};
  std::vector<double> steps;  // absolute step sizes actually used
};

inline constexpr double kDiniSafetyShrink = 1e-3;   // estimates shrink by (1 - this)
inline constexpr double kInvertTolerance = 1e-12;   // |g(x) - y| target
inline constexpr std::size_t kInvertMaxIter = 200;

/// Finite-difference lower bound for inf of the lower Dini derivative of g
/// over [range.lo, range.hi].
///
/// Forward differences (g(x+t) - g(x))/t over base_points grid points
/// (endpoints included) and steps step_rel[k] * range width; where x + t
/// would leave the range, the step is taken inward from x instead (a backward
/// difference), so the right endpoint is probed from inside; that value
/// reflects behavior just left of the endpoint rather than at it. The result
/// is clamped below at 0 (transforms here are monotone increasing where this
/// matters, so the true infimum is nonnegative). Degenerate ranges yield 0.
inline DiniEstimate estimate_dini_inf(const std::function<double(double)>& g,
                                      const RangeInterval& range,
                                      std::size_t base_points = 257,
                                      std::vector<double> step_rel = {1e-2, 1e-3, 1e-4,
                                                                      1e-5, 1e-6}) {
  if (base_points < 2) throw std::invalid_argument("estimate_dini_inf: base_points < 2");
  DiniEstimate est;
  est.base_points = base_points;
  const double w = range.width();
  if (w <= 0.0) {
    est.mu = 0.0;
    return est;
  }
  double mu = std::numeric_limits<double>::infinity();
  for (double rel : step_rel) {
    const double t = rel * w;
    if (!(t > 0.0)) continue;
    est.steps.push_back(t);
    for (std::size_t i = 0; i < base_points; ++i) {
      double x = range.lo + w * static_cast<double>(i) / static_cast<double>(base_points - 1);
      double a = x, b = x + t;
      if (b > range.hi) {  // inward step at the right edge
        a = x - t;
        b = x;
        if (a < range.lo) continue;
      }
      double d = (g(b) - g(a)) / t;
      if (!std::isfinite(d))
        throw std::runtime_error("estimate_dini_inf: non-finite evaluation inside range");
      mu = std::min(mu, d);
    }
  }
  if (!std::isfinite(mu)) throw std::runtime_error("estimate_dini_inf: empty probe set");
  est.mu = std::max(0.0, mu);
  return est;
}

/// Solve g(x) = y for monotone continuous g on [bracket.lo, bracket.hi] by
/// bisection; stops at |g(x) - y| <= 1e-12 or 200 iterations.
inline double invert_monotone(const std::function<double(double)>& g, double y,
                              const RangeInterval& bracket) {
  double a = bracket.lo, b = bracket.hi;
  double fa = g(a) - y, fb = g(b) - y;
  if (!(std::isfinite(fa) && std::isfinite(fb)))
    throw std::runtime_error("invert_monotone: non-finite endpoint value");
  if (std::abs(fa) <= kInvertTolerance) return a;
  if (std::abs(fb) <= kInvertTolerance) return b;
  if (fa * fb > 0.0)
    throw std::invalid_argument("invert_monotone: y outside the image of the bracket");
  double mid = 0.5 * (a + b);
  for (std::size_t it = 0; it < kInvertMaxIter; ++it) {
    mid = 0.5 * (a + b);
    double fm = g(mid) - y;
    if (std::abs(fm) <= kInvertTolerance || mid == a || mid == b) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return mid;
}

/// Mean value inequality g(b) - g(a) >= mu*(b - a) - tol for a <= b, the
/// workhorse behind every composition modulus here.
inline bool mean_value_check(const std::function<double(double)>& g, double a, double b,
                             double mu) {
  if (a > b) throw std::invalid_argument("mean_value_check: a > b");
  const double gap = g(b) - g(a);
  const double bound = mu * (b - a);
  const double tol = 1e-9 * (1.0 + std::abs(gap) + std::abs(bound));
  return gap >= bound - tol;
}

// ---- built-in transform registry --------------------------------------------

inline ScalarTransform identity_transform() {
  ScalarTransform t;
  t.name = "identity";
  t.eval = [](double x) { return x; };
  t.monotonicity = Monotonicity::increasing;
  t.analytic_dini_inf = [](const RangeInterval&) { return 1.0; };
  return t;
}

inline ScalarTransform ln_transform() {
  ScalarTransform t;
  t.name = "ln";
  t.eval = [](double x) { return std::log(x); };
  t.monotonicity = Monotonicity::increasing;
  t.analytic_dini_inf = [](const RangeInterval& r) {
    if (r.lo <= 0.0) throw std::invalid_argument("ln: range must be positive");
    return 1.0 / r.hi;
  };
  return t;
}

inline ScalarTransform exp_transform() {
  ScalarTransform t;
  t.name = "exp";
  t.eval = [](double x) { return std::exp(x); };
  t.monotonicity = Monotonicity::increasing;
  t.analytic_dini_inf = [](const RangeInterval& r) { return std::exp(r.lo); };
  return t;
}

/// t^p on positive arguments; increasing for p > 0, decreasing for p < 0.
inline ScalarTransform power_transform(double p) {
  if (p == 0.0) throw std::invalid_argument("power_transform: p must be nonzero");
  ScalarTransform t;
  t.name = "power";
  t.eval = [p](double x) { return std::pow(x, p); };
  t.monotonicity = p > 0.0 ? Monotonicity::increasing : Monotonicity::decreasing;
  if (p > 0.0) {
    t.analytic_dini_inf = [p](const RangeInterval& r) {
      if (r.lo < 0.0) throw std::invalid_argument("power: range must be nonnegative");
      // derivative p*t^(p-1) is monotone in t, infimum at one end
      double at = p >= 1.0 ? r.lo : r.hi;
      return p * std::pow(at, p - 1.0);
    };
  }
  return t;
}

inline ScalarTransform negate_transform() {
  ScalarTransform t;
  t.name = "negate";
  t.eval = [](double x) { return -x; };
  t.monotonicity = Monotonicity::decreasing;
  return t;
}

/// t -> 1/t, decreasing on every sign-definite interval.
inline ScalarTransform reciprocal_transform() {
  ScalarTransform t;
  t.name = "reciprocal";
  t.eval = [](double x) { return 1.0 / x; };
  t.monotonicity = Monotonicity::decreasing;
  return t;
}

/// Look up a registry transform by name ("power" takes its exponent).
inline ScalarTransform make_transform(const std::string& name,
                                      std::optional<double> param = std::nullopt) {
  if (name == "identity") return identity_transform();
  if (name == "ln") return ln_transform();
  if (name == "exp") return exp_transform();
  if (name == "negate") return negate_transform();
  if (name == "reciprocal") return reciprocal_transform();
  if (name == "power") {
    if (!param) throw std::invalid_argument("make_transform: power needs an exponent");
    return power_transform(*param);
  }
  throw std::invalid_argument("make_transform: unknown transform '" + name + "'");
}

/// Inverse of a registry transform, when it has one in the registry.
inline std::optional<ScalarTransform> registry_inverse(const ScalarTransform& t,
                                                       std::optional<double> param = std::nullopt) {
  if (t.name == "identity") return identity_transform();
  if (t.name == "ln") return exp_transform();
  if (t.name == "exp") return ln_transform();
  if (t.name == "negate") return negate_transform();
  if (t.name == "reciprocal") return reciprocal_transform();
  if (t.name == "power" && param && *param != 0.0) return power_transform(1.0 / *param);
  return std::nullopt;
}

}  // namespace starqc
