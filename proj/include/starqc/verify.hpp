#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "starqc/certificate.hpp"
#include "starqc/domain.hpp"
#include "starqc/expr.hpp"
#include "starqc/star_inequality.hpp"

namespace starqc {

using Objective = std::function<double(const Point&)>;

inline Objective as_objective(const Expr& e) {
  return [e](const Point& p) { return e.evaluate(p); };
}

/// A concrete point at which a property check failed. For star-inequality and
/// minimizer checks x is the certified center; for pairwise quasiconvexity
/// checks x and y are the segment endpoints. lhs/rhs are the two sides of the
/// violated inequality (lhs should not have exceeded rhs).
struct Witness {
  Point x;
  Point y;
  double lambda{0.0};
  double lhs{0.0};
  double rhs{0.0};
};

/// Outcome of one verification campaign. Invariant:
/// passed == (worst_slack >= -tolerance), where worst_slack/tolerance belong
/// to the sample minimizing slack + tol. witness is the first failing sample
/// in scan order (deterministic for a fixed seed), not necessarily the worst.
struct VerificationReport {
  std::string property;
  bool passed{true};
  std::size_t samples_used{0};
  double worst_slack{std::numeric_limits<double>::infinity()};
  std::optional<Witness> witness;
  double tolerance{0.0};
  std::uint64_t seed{0};
};

struct StarCheckOptions {
  std::size_t n_points{2000};
  std::size_t n_lambdas{21};
  std::uint64_t seed{0};
  unsigned n_workers{1};
};

struct SublevelOptions {
  std::vector<double> deltas;  // empty: use value quantiles of 256 samples
  std::size_t grid_per_axis{33};
  std::size_t n_lambdas{33};
  std::uint64_t seed{0};
};

struct RayOptions {
  std::size_t n_rays{16};
  std::size_t n_t{33};
  std::size_t n_lambdas{21};
  std::uint64_t seed{0};
};

struct FalsifyOptions {
  std::size_t n_pairs{256};
  std::size_t n_points{2000};
  std::size_t n_lambdas{21};
  std::uint64_t seed{0};
};

namespace detail {

// Fold one sample into the running report: worst is chosen by slack + tol so
// reports with per-sample tolerances still satisfy the passed/worst invariant.
template <typename MakeWitness>
inline void fold_sample(VerificationReport& r, double slack, double tol,
                        MakeWitness&& make_witness) {
  ++r.samples_used;
  if (slack + tol < r.worst_slack + r.tolerance ||
      r.worst_slack == std::numeric_limits<double>::infinity()) {
    r.worst_slack = slack;
    r.tolerance = tol;
  }
  if (slack < -tol && !r.witness) {
    r.witness = make_witness();
    r.passed = false;
  }
}

inline void finalize(VerificationReport& r) {
  if (r.samples_used == 0) {
    r.worst_slack = 0.0;
    r.tolerance = 0.0;
  }
  r.passed = !r.witness;
}

}  // namespace detail

/// Combine two reports over disjoint sample sets (associative). The earlier
/// report's witness wins, preserving scan order when partitions are merged in
/// order.
inline VerificationReport merge_reports(const VerificationReport& a,
                                        const VerificationReport& b) {
  if (a.property != b.property)
    throw std::invalid_argument("merge_reports: property mismatch");
  VerificationReport out = a;
  out.samples_used = a.samples_used + b.samples_used;
  if (b.samples_used > 0 &&
      (a.samples_used == 0 || b.worst_slack + b.tolerance < a.worst_slack + a.tolerance)) {
    out.worst_slack = b.worst_slack;
    out.tolerance = b.tolerance;
  }
  if (!out.witness) out.witness = b.witness;
  out.passed = a.passed && b.passed;
  return out;
}

// ---- star inequality ----------------------------------------------------------

namespace detail {

inline VerificationReport star_scan(const Objective& h, const Certificate& cert,
                                    const std::vector<Point>& points,
                                    const std::vector<double>& lambdas, std::uint64_t seed) {
  VerificationReport r;
  r.property = "star_inequality";
  r.seed = seed;
  for (const Point& y : points) {
    for (double lam : lambdas) {
      StarSample s = star_sample(h, cert.xbar, y, lam, cert.gamma, cert.orientation);
      fold_sample(r, s.slack, s.tol, [&] {
        return Witness{cert.xbar, y, lam, s.lhs, s.rhs};
      });
    }
  }
  finalize(r);
  return r;
}

}  // namespace detail

/// Sample-based check of the defining inequality
///   h(lam*xbar + (1-lam)*y) <= h(y) - lam*(1-lam)*(gamma/2)*|y-xbar|^2
/// (mirrored for the concave orientation) over n_points seeded draws times the
/// anchored lambda grid. Deterministic for a fixed seed and worker count
/// (partitions merge in order, so the witness matches the serial scan).
inline VerificationReport check_star_inequality(const Objective& h, const BoxDomain& box,
                                                const Certificate& cert,
                                                StarCheckOptions opt = {}) {
  std::vector<Point> points = sample(box, opt.n_points, opt.seed);
  std::vector<double> lambdas = lambda_grid(opt.n_lambdas);
  unsigned workers = std::max(1u, opt.n_workers);
  if (workers == 1 || points.size() < 2 * workers)
    return detail::star_scan(h, cert, points, lambdas, opt.seed);

  std::vector<VerificationReport> parts(workers);
  std::vector<std::thread> pool;
  std::size_t chunk = (points.size() + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      std::size_t b = std::min(points.size(), w * chunk);
      std::size_t e = std::min(points.size(), (w + 1) * chunk);
      std::vector<Point> slice(points.begin() + b, points.begin() + e);
      parts[w] = detail::star_scan(h, cert, slice, lambdas, opt.seed);
    });
  }
  for (auto& t : pool) t.join();
  VerificationReport merged = parts[0];
  for (unsigned w = 1; w < workers; ++w) merged = merge_reports(merged, parts[w]);
  return merged;
}

inline VerificationReport check_star_inequality(const Expr& e, StarCheckOptions opt = {}) {
  std::optional<Certificate> cert = e.certificate();
  if (!cert) throw std::invalid_argument("check_star_inequality: expression has no certificate");
  return check_star_inequality(as_objective(e), e.box(), *cert, opt);
}

// ---- sublevel star-shapedness ---------------------------------------------------

/// Check that each sublevel set {h <= delta} restricted to a dense grid is
/// star-shaped at the certified center: every segment point between xbar and a
/// grid member must stay in the sublevel set (tolerance 1e-9*(1+|delta|)).
/// For the concave orientation superlevel sets {h >= delta} are checked.
inline VerificationReport check_sublevel_star(const Objective& h, const BoxDomain& box,
                                              const Certificate& cert,
                                              SublevelOptions opt = {}) {
  const bool concave = cert.orientation == Orientation::star_quasiconcave;
  VerificationReport r;
  r.property = "sublevel_star_shaped";
  r.seed = opt.seed;

  std::vector<double> deltas = opt.deltas;
  if (deltas.empty()) {
    std::vector<double> vals;
    for (const Point& p : sample(box, 256, opt.seed)) vals.push_back(h(p));
    std::sort(vals.begin(), vals.end());
    for (double q : {0.25, 0.5, 0.75})
      deltas.push_back(vals[static_cast<std::size_t>(q * (vals.size() - 1))]);
  }

  const std::size_t dim = box.dimension();
  const std::size_t g = std::max<std::size_t>(2, opt.grid_per_axis);
  double total = 1.0;
  for (std::size_t i = 0; i < dim; ++i) total *= static_cast<double>(g);
  if (total > 1e7) throw std::invalid_argument("check_sublevel_star: grid too large");

  std::vector<double> lambdas = lambda_grid(opt.n_lambdas);
  Point p(dim);
  std::vector<std::size_t> idx(dim, 0);
  for (;;) {
    for (std::size_t i = 0; i < dim; ++i) {
      const Interval& ax = box.axis(i);
      p[i] = ax.lo + ax.width() * static_cast<double>(idx[i]) / static_cast<double>(g - 1);
    }
    double hp = h(p);
    for (double delta : deltas) {
      bool member = concave ? hp >= delta : hp <= delta;
      if (!member) continue;
      for (double lam : lambdas) {
        Point z = segment_point(cert.xbar, p, lam);
        double hz = h(z);
        double tol = 1e-9 * (1.0 + std::abs(delta));
        double slack = concave ? hz - delta : delta - hz;
        detail::fold_sample(r, slack, tol, [&] {
          return Witness{cert.xbar, p, lam, concave ? delta : hz, concave ? hz : delta};
        });
      }
    }
    std::size_t k = 0;
    while (k < dim && ++idx[k] == g) idx[k++] = 0;
    if (k == dim) break;
  }
  detail::finalize(r);
  return r;
}

inline VerificationReport check_sublevel_star(const Expr& e, SublevelOptions opt = {}) {
  std::optional<Certificate> cert = e.certificate();
  if (!cert) throw std::invalid_argument("check_sublevel_star: expression has no certificate");
  return check_sublevel_star(as_objective(e), e.box(), *cert, opt);
}

// ---- restriction to lines through the center -------------------------------------

namespace detail {

// Feasible parameter range of the full line xbar + t*d inside the box.
inline std::pair<double, double> line_extent(const BoxDomain& box, const Point& xbar,
                                             const Point& d) {
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < box.dimension(); ++i) {
    if (d[i] == 0.0) continue;
    double a = (box.axis(i).lo - xbar[i]) / d[i];
    double b = (box.axis(i).hi - xbar[i]) / d[i];
    if (a > b) std::swap(a, b);
    t_lo = std::max(t_lo, a);
    t_hi = std::min(t_hi, b);
  }
  return {t_lo, t_hi};
}

}  // namespace detail

/// Check that the restriction of h to full lines through the certified center
/// is quasiconvex (quasiconcave for the concave orientation). Directions point
/// at sampled box points; each line is gridded over its whole feasible extent,
/// both sides of the center, and every ordered pair of grid points is tested
/// against the segment-max inequality.
inline VerificationReport check_ray_quasiconvex(const Objective& h, const BoxDomain& box,
                                                const Certificate& cert, RayOptions opt = {}) {
  const double sgn = cert.orientation == Orientation::star_quasiconcave ? -1.0 : 1.0;
  VerificationReport r;
  r.property = "ray_quasiconvex";
  r.seed = opt.seed;
  std::vector<double> lambdas = lambda_grid(opt.n_lambdas);
  const std::size_t dim = box.dimension();
  const std::size_t n_t = std::max<std::size_t>(2, opt.n_t);

  for (const Point& y : sample(box, opt.n_rays, opt.seed)) {
    Point d(dim);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      d[i] = y[i] - cert.xbar[i];
      norm += d[i] * d[i];
    }
    if (norm < 1e-24) continue;
    auto [t_lo, t_hi] = detail::line_extent(box, cert.xbar, d);
    if (!(t_hi > t_lo)) continue;
    std::vector<Point> line(n_t, Point(dim));
    std::vector<double> hv(n_t);
    for (std::size_t k = 0; k < n_t; ++k) {
      double t = t_lo + (t_hi - t_lo) * static_cast<double>(k) / static_cast<double>(n_t - 1);
      for (std::size_t i = 0; i < dim; ++i)
        line[k][i] = box.axis(i).clamp(cert.xbar[i] + t * d[i]);
      hv[k] = sgn * h(line[k]);
    }
    for (std::size_t a = 0; a < n_t; ++a) {
      for (std::size_t b = a + 1; b < n_t; ++b) {
        double cap = std::max(hv[a], hv[b]);
        double tol = 1e-9 * (1.0 + std::abs(cap));
        for (double lam : lambdas) {
          Point z = segment_point(line[a], line[b], lam);
          double hz = sgn * h(z);
          detail::fold_sample(r, cap - hz, tol, [&] {
            return Witness{line[a], line[b], lam, sgn * hz, sgn * cap};
          });
        }
      }
    }
  }
  detail::finalize(r);
  return r;
}

inline VerificationReport check_ray_quasiconvex(const Expr& e, RayOptions opt = {}) {
  std::optional<Certificate> cert = e.certificate();
  if (!cert) throw std::invalid_argument("check_ray_quasiconvex: expression has no certificate");
  return check_ray_quasiconvex(as_objective(e), e.box(), *cert, opt);
}

// ---- falsifiers -------------------------------------------------------------------

/// Search for a quasiconvexity violation: a pair of points and a lambda with
/// h(segment) > max(h(x), h(y)) + tol. Pairs are scanned in index order over a
/// seeded sample (corners first), capped at n_pairs pairs, so low-index
/// witnesses are stable. passed=false means a violation was found.
inline VerificationReport falsify_quasiconvex(const Objective& h, const BoxDomain& box,
                                              FalsifyOptions opt = {},
                                              Orientation orientation =
                                                  Orientation::star_quasiconvex) {
  const double sgn = orientation == Orientation::star_quasiconcave ? -1.0 : 1.0;
  VerificationReport r;
  r.property = "quasiconvex_pairs";
  r.seed = opt.seed;
  std::vector<Point> pts = sample(box, opt.n_pairs, opt.seed);
  std::vector<double> hv(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) hv[i] = sgn * h(pts[i]);
  std::vector<double> lambdas = lambda_grid(opt.n_lambdas);
  std::size_t tested = 0;
  for (std::size_t i = 0; i < pts.size() && tested < opt.n_pairs; ++i) {
    for (std::size_t j = i + 1; j < pts.size() && tested < opt.n_pairs; ++j) {
      ++tested;
      double cap = std::max(hv[i], hv[j]);
      double tol = 1e-9 * (1.0 + std::abs(cap));
      for (double lam : lambdas) {
        Point z = segment_point(pts[i], pts[j], lam);
        double hz = sgn * h(z);
        detail::fold_sample(r, cap - hz, tol, [&] {
          return Witness{pts[i], pts[j], lam, sgn * hz, sgn * cap};
        });
      }
    }
  }
  detail::finalize(r);
  return r;
}

inline VerificationReport falsify_quasiconvex(const Expr& e, FalsifyOptions opt = {}) {
  Orientation o = Orientation::star_quasiconvex;
  if (auto cert = e.certificate()) o = cert->orientation;
  return falsify_quasiconvex(as_objective(e), e.box(), opt, o);
}

/// Search for a sampled point strictly better than the certified center
/// (below it for the convex orientation, above for the concave one). The
/// witness records x = xbar, lambda = 1, lhs = h(xbar), rhs = h(y).
inline VerificationReport falsify_minimizer(const Objective& h, const BoxDomain& box,
                                            const Certificate& cert, FalsifyOptions opt = {}) {
  const double sgn = cert.orientation == Orientation::star_quasiconcave ? -1.0 : 1.0;
  VerificationReport r;
  r.property = "center_is_minimizer";
  r.seed = opt.seed;
  const double ref = sgn * h(cert.xbar);
  for (const Point& y : sample(box, opt.n_points, opt.seed)) {
    double hy = sgn * h(y);
    double tol = 1e-9 * (1.0 + std::abs(ref));
    detail::fold_sample(r, hy - ref, tol, [&] {
      return Witness{cert.xbar, y, 1.0, sgn * ref, sgn * hy};
    });
  }
  detail::finalize(r);
  return r;
}

inline VerificationReport falsify_minimizer(const Expr& e, FalsifyOptions opt = {}) {
  std::optional<Certificate> cert = e.certificate();
  if (!cert) throw std::invalid_argument("falsify_minimizer: expression has no certificate");
  return falsify_minimizer(as_objective(e), e.box(), *cert, opt);
}

// ---- characterization cross-check --------------------------------------------------

struct CrossCheckOptions {
  StarCheckOptions star;
  SublevelOptions sublevel;
  RayOptions ray;
};

struct CrossCheckResult {
  VerificationReport star;
  VerificationReport sublevel;
  VerificationReport ray;
  bool agree{false};  // all three checks reach the same verdict
};

/// Run the defining inequality against both geometric characterizations
/// (sublevel star-shapedness and quasiconvexity along lines through the
/// center). The geometric characterizations are modulus-blind: they describe
/// plain star quasiconvexity whatever gamma the certificate carries, so the
/// internal star check runs with the modulus zeroed. The three verdicts must
/// then agree for a sound center and for a cleanly falsified one;
/// disagreement flags a tolerance or sampling artifact.
inline CrossCheckResult cross_check_characterizations(const Objective& h, const BoxDomain& box,
                                                      const Certificate& cert,
                                                      CrossCheckOptions opt = {}) {
  Certificate geometry(cert.xbar, 0.0, cert.orientation, cert.provenance);
  // The sublevel scan is the one check whose cost is exponential in the
  // dimension, so thin its per-axis count here rather than making every
  // caller dimension-aware.
  opt.sublevel.grid_per_axis =
      detail::grid_per_axis(opt.sublevel.grid_per_axis, box.dimension(), 100000);
  CrossCheckResult out;
  out.star = check_star_inequality(h, box, geometry, opt.star);
  out.sublevel = check_sublevel_star(h, box, cert, opt.sublevel);
  out.ray = check_ray_quasiconvex(h, box, cert, opt.ray);
  out.agree = out.star.passed == out.sublevel.passed && out.star.passed == out.ray.passed;
  return out;
}

inline CrossCheckResult cross_check_characterizations(const Expr& e,
                                                      CrossCheckOptions opt = {}) {
  std::optional<Certificate> cert = e.certificate();
  if (!cert)
    throw std::invalid_argument("cross_check_characterizations: expression has no certificate");
  return cross_check_characterizations(as_objective(e), e.box(), *cert, opt);
}

}  // namespace starqc
