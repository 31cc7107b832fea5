#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "starqc/certificate.hpp"
#include "starqc/domain.hpp"

namespace starqc {

/// One evaluated cell of the star inequality.
struct StarSample {
  double lhs{0.0};    // h(lambda*xbar + (1-lambda)*y), sign-adjusted
  double rhs{0.0};    // h(y) - lambda*(1-lambda)*(gamma/2)*||y-xbar||^2
  double slack{0.0};  // rhs - lhs; negative beyond tol means violation
  double tol{0.0};
};

namespace detail {

/// Evaluate the star inequality for h at (y, lambda) against (xbar, gamma).
/// The concave orientation is checked by negating h, so slack keeps one sign
/// convention: slack < -tol is always a violation of the certificate.
template <typename H>
StarSample star_sample(H&& h, const Point& xbar, const Point& y, double lambda, double gamma,
                       Orientation orientation) {
  const double sign = orientation == Orientation::star_quasiconvex ? 1.0 : -1.0;
  const double hy = sign * h(y);
  const double hseg = sign * h(segment_point(xbar, y, lambda));
  StarSample s;
  s.lhs = hseg;
  s.rhs = hy - lambda * (1.0 - lambda) * 0.5 * gamma * squared_distance(y, xbar);
  s.slack = s.rhs - s.lhs;
  s.tol = 1e-9 * (1.0 + std::abs(hy));
  return s;
}

}  // namespace detail

/// Lambda grid: n uniformly spaced values on [0,1] merged with the anchors
/// {0, 1/4, 1/2, 3/4, 1}, in scan order 0, 1, 1/2, 1/4, 3/4, then the rest
/// ascending. Endpoint and midpoint cells are probed first so the earliest
/// witness lands on them.
inline std::vector<double> lambda_grid(std::size_t n) {
  std::vector<double> vals{0.0, 1.0, 0.5, 0.25, 0.75};
  std::vector<double> fill;
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i)
      fill.push_back(static_cast<double>(i) / static_cast<double>(n - 1));
  }
  std::sort(fill.begin(), fill.end());
  for (double v : fill)
    if (std::find(vals.begin(), vals.end(), v) == vals.end()) vals.push_back(v);
  return vals;
}

}  // namespace starqc
