#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "starqc/certificate.hpp"
#include "starqc/domain.hpp"
#include "starqc/scalar.hpp"
#include "starqc/star_inequality.hpp"

namespace starqc {

class Expr;

enum class ExprKind { atom, sum, product, min, compose, reciprocal, wqam };

// Fixed stream for every construction-time screening pass (atom claims,
// positivity grids, range estimation). Independent of user seeds so that
// building an expression never perturbs a verification campaign.
inline constexpr std::uint64_t kScreenSeed = 0x51a9c0de;

namespace detail {

using AtomEval = std::function<double(std::span<const double>)>;

struct ExprNode {
  ExprKind kind{ExprKind::atom};
  BoxDomain box;  // flattened domain of the whole subtree
  std::vector<Expr> children;
  std::vector<std::size_t> offsets;  // children.size()+1 slice boundaries
  std::optional<Certificate> claimed;
  std::optional<Certificate> derived;
  std::string label;

  AtomEval atom_eval;

  ScalarTransform transform;  // compose
  DiniEstimate mu;            // compose: resolved Dini infimum

  bool positivity_checked{false};          // product
  std::optional<std::vector<double>> bounds;  // product part (c)

  int sign{0};  // reciprocal: +1 or -1 on the screened domain

  ScalarTransform generator;  // wqam
  std::optional<ScalarTransform> generator_inverse;
  std::vector<double> weights;

  double eval(std::span<const double> x) const;
};

}  // namespace detail

/// Immutable expression handle. Evaluation is pure; certificates attach at
/// construction and never change.
class Expr {
 public:
  Expr() = default;

  double evaluate(std::span<const double> p) const {
    const detail::ExprNode& n = *node_;
    if (!n.box.contains_within(p, 1e-12))
      throw std::domain_error("evaluate: point outside domain");
    // segment points can land a rounding error outside a face; snap back
    Point q = n.box.clamp(p);
    return n.eval(q);
  }
  double evaluate(const Point& p) const { return evaluate(std::span<const double>(p)); }
  double operator()(const Point& p) const { return evaluate(p); }

  ExprKind kind() const { return node_->kind; }
  const BoxDomain& box() const { return node_->box; }
  std::size_t dimension() const { return node_->box.dimension(); }
  const std::vector<Expr>& children() const { return node_->children; }
  const std::string& label() const { return node_->label; }
  const detail::ExprNode& node() const { return *node_; }

  /// Derived certificate if a rule produced one, else the atom's claim.
  std::optional<Certificate> certificate() const {
    const Certificate* p = certificate_ptr();
    if (p) return *p;
    return std::nullopt;
  }

  /// Same certificate without the copy; valid while this Expr is alive.
  const Certificate* certificate_ptr() const {
    if (node_->derived) return &*node_->derived;
    if (node_->claimed) return &*node_->claimed;
    return nullptr;
  }

  /// Human-readable derivation chain, e.g.
  /// "compose[ln]{derived_rule(monotone_composition)}(atom 'H')".
  std::string describe_rules() const;

  bool valid() const { return node_ != nullptr; }

 private:
  explicit Expr(std::shared_ptr<const detail::ExprNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::ExprNode> node_;

  friend Expr make_atom(detail::AtomEval, BoxDomain, std::optional<Certificate>, std::string,
                        bool);
  friend Expr sum(std::vector<Expr>, const ProductDomain&);
  friend Expr compose_monotone(ScalarTransform, Expr);
  friend Expr reciprocal(Expr);
  friend Expr min_combine(std::vector<Expr>, const ProductDomain&);
  friend Expr product(std::vector<Expr>, const ProductDomain&,
                      std::optional<std::vector<double>>);
  friend Expr product_via_log(std::vector<Expr>, const ProductDomain&, double);
  friend Expr wqam(ScalarTransform, std::optional<ScalarTransform>, std::vector<double>,
                   std::vector<Expr>);
};

inline std::optional<Certificate> certificate_of(const Expr& e) { return e.certificate(); }

// ---- node evaluation ---------------------------------------------------------

namespace detail {

inline double ExprNode::eval(std::span<const double> x) const {
  switch (kind) {
    case ExprKind::atom:
      return atom_eval(x);
    case ExprKind::sum: {
      double s = 0.0;
      for (std::size_t i = 0; i < children.size(); ++i)
        s += children[i].node().eval(x.subspan(offsets[i], offsets[i + 1] - offsets[i]));
      return s;
    }
    case ExprKind::product: {
      double p = 1.0;
      for (std::size_t i = 0; i < children.size(); ++i)
        p *= children[i].node().eval(x.subspan(offsets[i], offsets[i + 1] - offsets[i]));
      return p;
    }
    case ExprKind::min: {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < children.size(); ++i)
        m = std::min(m, children[i].node().eval(
                            x.subspan(offsets[i], offsets[i + 1] - offsets[i])));
      return m;
    }
    case ExprKind::compose:
      return transform.eval(children[0].node().eval(x));
    case ExprKind::reciprocal:
      return 1.0 / children[0].node().eval(x);
    case ExprKind::wqam: {
      std::vector<double> v(children.size());
      for (std::size_t i = 0; i < children.size(); ++i)
        v[i] = children[i].node().eval(x.subspan(offsets[i], offsets[i + 1] - offsets[i]));
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += weights[i] * generator.eval(v[i]);
      if (generator_inverse) return generator_inverse->eval(s);
      double vmin = *std::min_element(v.begin(), v.end());
      double vmax = *std::max_element(v.begin(), v.end());
      if (vmin == vmax) return vmin;
      // s is a convex combination of f(v_i), so the root lives in [vmin,vmax];
      // nudge s into the achievable hull to absorb summation roundoff
      double flo = generator.eval(vmin), fhi = generator.eval(vmax);
      double lo = std::min(flo, fhi), hi = std::max(flo, fhi);
      double margin = 1e-9 * (1.0 + std::abs(lo) + std::abs(hi));
      if (s < lo - margin || s > hi + margin)
        throw std::runtime_error("wqam: aggregated value escaped the generator's range");
      s = std::clamp(s, lo, hi);
      return invert_monotone(generator.eval, s, RangeInterval(vmin, vmax));
    }
  }
  throw std::logic_error("ExprNode::eval: unreachable");
}

// ---- construction-time screening helpers -------------------------------------

struct ValueScreen {
  double min_value{0.0};
  double max_value{0.0};
  RangeInterval widened;  // [min,max] widened by 1e-9 relative
};

inline std::size_t grid_per_axis(std::size_t requested, std::size_t dim, std::size_t cap) {
  std::size_t g = requested < 2 ? 2 : requested;
  auto total = [dim](std::size_t k) {
    double t = 1.0;
    for (std::size_t i = 0; i < dim; ++i) t *= static_cast<double>(k);
    return t;
  };
  while (g > 2 && total(g) > static_cast<double>(cap)) --g;
  return g;
}

/// Min/max of an expression over a dense grid (33 per axis by default, capped
/// at 1e5 points) plus 200 seeded samples. The range is an inner estimate;
/// the widened form adds a 1e-9 relative guard band.
inline ValueScreen screen_values(const Expr& e, std::size_t per_axis = 33,
                                 std::size_t cap = 100000, std::size_t extra = 200,
                                 std::uint64_t seed = kScreenSeed) {
  const BoxDomain& box = e.box();
  const std::size_t dim = box.dimension();
  const std::size_t g = grid_per_axis(per_axis, dim, cap);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  Point p(dim);
  std::vector<std::size_t> idx(dim, 0);
  auto visit = [&](const Point& q) {
    double v = e.evaluate(q);
    if (!std::isfinite(v))
      throw std::runtime_error("range screening: non-finite evaluation inside domain");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (;;) {
    for (std::size_t i = 0; i < dim; ++i) {
      const Interval& ax = box.axis(i);
      p[i] = ax.lo + ax.width() * static_cast<double>(idx[i]) / static_cast<double>(g - 1);
    }
    visit(p);
    std::size_t k = 0;
    while (k < dim && ++idx[k] == g) idx[k++] = 0;
    if (k == dim) break;
  }
  for (const Point& q : sample(box, extra, seed)) visit(q);
  ValueScreen out;
  out.min_value = lo;
  out.max_value = hi;
  out.widened = RangeInterval(lo, hi).widened();
  return out;
}

/// Verify a transform's monotonicity tag against evaluations on the range.
inline void screen_monotonicity(const ScalarTransform& g, const RangeInterval& r,
                                std::size_t n = 33) {
  if (r.width() <= 0.0) return;
  double prev = g.eval(r.lo);
  for (std::size_t i = 1; i < n; ++i) {
    double t = r.lo + r.width() * static_cast<double>(i) / static_cast<double>(n - 1);
    double v = g.eval(t);
    if (!std::isfinite(v))
      throw std::runtime_error("transform '" + g.name + "': non-finite value on range");
    double tol = 1e-12 * (1.0 + std::abs(prev) + std::abs(v));
    bool ok = g.monotonicity == Monotonicity::increasing ? v >= prev - tol : v <= prev + tol;
    if (!ok)
      throw std::invalid_argument("transform '" + g.name +
                                  "': monotonicity tag inconsistent with evaluations");
    prev = v;
  }
}

/// Resolve the Dini infimum of g over r: caller-supplied value wins, then the
/// registry's analytic formula, then the finite-difference estimator (whose
/// result is shrunk by the safety factor before certificate use).
inline DiniEstimate resolve_dini(const ScalarTransform& g, const RangeInterval& r) {
  DiniEstimate est;
  if (g.dini_inf) {
    est.mu = *g.dini_inf;
    est.is_analytic = true;
  } else if (g.analytic_dini_inf) {
    est.mu = g.analytic_dini_inf(r);
    est.is_analytic = true;
  } else {
    est = estimate_dini_inf(g.eval, r);
    est.mu *= (1.0 - kDiniSafetyShrink);
    est.is_analytic = false;
  }
  if (est.mu < 0.0)
    throw std::invalid_argument("transform '" + g.name + "': negative Dini infimum");
  return est;
}

inline const Certificate& require_certificate(const Expr& e, const char* who) {
  const Certificate* cert = e.certificate_ptr();
  if (!cert) throw std::invalid_argument(std::string(who) + ": child without certificate");
  return *cert;
}

inline void require_orientation(const Certificate& c, Orientation o, const char* who) {
  if (c.orientation != o)
    throw std::invalid_argument(std::string(who) + ": child certificate must be " +
                                to_string(o));
}

inline void require_blocks_match(const std::vector<Expr>& children, const ProductDomain& dom,
                                 const char* who) {
  if (children.empty()) throw std::invalid_argument(std::string(who) + ": no children");
  if (dom.block_count() != children.size())
    throw std::invalid_argument(std::string(who) + ": domain block count mismatch");
  for (std::size_t i = 0; i < children.size(); ++i) {
    const BoxDomain& a = children[i].box();
    const BoxDomain& b = dom.block(i);
    if (a.dimension() != b.dimension())
      throw std::invalid_argument(std::string(who) + ": domain blocks must match child domains");
    for (std::size_t k = 0; k < a.dimension(); ++k)
      if (a.axis(k).lo != b.axis(k).lo || a.axis(k).hi != b.axis(k).hi)
        throw std::invalid_argument(std::string(who) +
                                    ": domain blocks must match child domains");
  }
}

inline std::vector<std::size_t> slice_offsets(const std::vector<Expr>& children) {
  std::vector<std::size_t> off{0};
  for (const Expr& c : children) off.push_back(off.back() + c.dimension());
  return off;
}

inline Point concat_xbars(const std::vector<Expr>& children) {
  Point xbar;
  for (const Expr& c : children) {
    const Certificate& cert = *c.certificate_ptr();
    xbar.insert(xbar.end(), cert.xbar.begin(), cert.xbar.end());
  }
  return xbar;
}

inline bool any_screened(const std::vector<Expr>& children) {
  for (const Expr& c : children)
    if (c.certificate_ptr()->provenance.kind == Provenance::Kind::numerically_screened)
      return true;
  return false;
}

inline Provenance rule_provenance(std::string rule, bool inputs_screened,
                                  bool quantities_screened) {
  if (inputs_screened || quantities_screened) return Provenance::screened(std::move(rule));
  return Provenance::derived(std::move(rule));
}

}  // namespace detail

// ---- atoms -------------------------------------------------------------------

/// Leaf expression over a box. A claimed certificate is screened on
/// construction (200 sampled points against the anchor lambdas) unless
/// `trusted` is set; negative-control corpus entries use trusted claims
/// deliberately.
inline Expr make_atom(detail::AtomEval eval, BoxDomain dom,
                      std::optional<Certificate> claimed = std::nullopt,
                      std::string label = "atom", bool trusted = false) {
  if (!eval) throw std::invalid_argument("make_atom: empty evaluator");
  auto node = std::make_shared<detail::ExprNode>();
  node->kind = ExprKind::atom;
  node->box = std::move(dom);
  node->atom_eval = std::move(eval);
  node->label = std::move(label);
  if (claimed) {
    if (claimed->xbar.size() != node->box.dimension())
      throw std::invalid_argument("make_atom: certificate xbar has wrong dimension");
    if (!node->box.contains(claimed->xbar))
      throw std::invalid_argument("make_atom: certificate xbar outside the domain");
    if (!trusted) {
      auto h = [&node](const Point& q) { return node->atom_eval(std::span<const double>(q)); };
      const double anchors[] = {0.0, 0.25, 0.5, 0.75, 1.0};
      for (const Point& y : sample(node->box, 200, kScreenSeed)) {
        for (double lam : anchors) {
          StarSample s = detail::star_sample(h, claimed->xbar, y, lam, claimed->gamma,
                                             claimed->orientation);
          if (s.slack < -s.tol)
            throw std::invalid_argument("make_atom: claimed certificate for '" + node->label +
                                        "' failed screening (slack " +
                                        std::to_string(s.slack) + " at lambda " +
                                        std::to_string(lam) + ")");
        }
      }
    }
    node->claimed = std::move(claimed);
  }
  return Expr(std::move(node));
}

/// One-dimensional atom from a plain double -> double function.
inline Expr make_scalar_atom(std::function<double(double)> f, Interval iv,
                             std::optional<Certificate> claimed = std::nullopt,
                             std::string label = "atom", bool trusted = false) {
  auto eval = [f = std::move(f)](std::span<const double> x) { return f(x[0]); };
  return make_atom(std::move(eval), BoxDomain({iv}), std::move(claimed), std::move(label),
                   trusted);
}

// ---- combination rules -------------------------------------------------------

/// Additive rule: a sum of certified children is certified at the
/// concatenated minimizers with gamma = min_i gamma_i. A child certified with
/// modulus gamma_i also satisfies the weaker inequality at min_i gamma_i (the
/// subtracted quadratic only shrinks), so the common-modulus theorem applies.
inline Expr sum(std::vector<Expr> children, const ProductDomain& domain) {
  detail::require_blocks_match(children, domain, "sum");
  Orientation orient = detail::require_certificate(children[0], "sum").orientation;
  double gamma = std::numeric_limits<double>::infinity();
  for (const Expr& c : children) {
    const Certificate& cert = detail::require_certificate(c, "sum");
    if (cert.orientation != orient)
      throw std::invalid_argument("sum: mixed certificate orientations");
    gamma = std::min(gamma, cert.gamma);
  }
  auto node = std::make_shared<detail::ExprNode>();
  node->kind = ExprKind::sum;
  node->box = domain.flattened();
  node->offsets = detail::slice_offsets(children);
  node->derived = Certificate(
      detail::concat_xbars(children), gamma, orient,
      detail::rule_provenance("additive", detail::any_screened(children), false));
  node->children = std::move(children);
  return Expr(std::move(node));
}

/// Monotone composition: for increasing continuous g and a star-quasiconvex
/// child with modulus gamma, g∘child is star-quasiconvex with modulus mu*gamma,
/// mu a lower bound of g's lower Dini derivative over the child's value range.
/// The range is screened from a grid; mu comes from the caller, the registry
/// formula, or the finite-difference estimator (which demotes provenance).
inline Expr compose_monotone(ScalarTransform g, Expr child) {
  const Certificate cert = detail::require_certificate(child, "compose_monotone");
  detail::require_orientation(cert, Orientation::star_quasiconvex, "compose_monotone");
  if (g.monotonicity == Monotonicity::decreasing)
    throw std::invalid_argument("compose_monotone: transform must be increasing");
  detail::ValueScreen vals = detail::screen_values(child);
  detail::screen_monotonicity(g, vals.widened);
  DiniEstimate mu = detail::resolve_dini(g, vals.widened);

  auto node = std::make_shared<detail::ExprNode>();
  node->kind = ExprKind::compose;
  node->box = child.box();
  node->offsets = {0, child.dimension()};
  node->transform = std::move(g);
  node->mu = mu;
  bool child_screened = cert.provenance.kind == Provenance::Kind::numerically_screened;
  node->derived =
      Certificate(cert.xbar, mu.mu * cert.gamma, Orientation::star_quasiconvex,
                  detail::rule_provenance("monotone_composition", child_screened,
                                          !mu.is_analytic));
  node->children = {std::move(child)};
  return Expr(std::move(node));
}

/// Reciprocal of a sign-definite star-quasiconcave child is star-quasiconvex
/// (and vice versa) at the same center, with modulus mu*gamma where
/// mu = inf of 1/t^2 over the child's screened range. Sign-definiteness is
/// grid-screened, so the certificate is always falsification-grade.
inline Expr reciprocal(Expr child) {
  const Certificate cert = detail::require_certificate(child, "reciprocal");
  detail::ValueScreen vals = detail::screen_values(child);
  int sign;
  if (vals.min_value > 0.0)
    sign = 1;
  else if (vals.max_value < 0.0)
    sign = -1;
  else
    throw std::invalid_argument("reciprocal: child is not sign-definite on the screened grid");
  const RangeInterval r = vals.widened;
  const double tmax = std::max(std::abs(r.lo), std::abs(r.hi));
  const double mu = 1.0 / (tmax * tmax);
  Orientation flipped = cert.orientation == Orientation::star_quasiconvex
                            ? Orientation::star_quasiconcave
                            : Orientation::star_quasiconvex;

  auto node = std::make_shared<detail::ExprNode>();
  node->kind = ExprKind::reciprocal;
  node->box = child.box();
  node->offsets = {0, child.dimension()};
  node->sign = sign;
  node->derived = Certificate(cert.xbar, mu * cert.gamma, flipped,
                              Provenance::screened("reciprocal"));
  node->children = {std::move(child)};
  return Expr(std::move(node));
}

/// Minimum of scalar children, each star-quasiconvex at the left endpoint of
/// its interval. The modulus is dropped to 0 by design: the underlying
/// argument does not survive for gamma > 0, so no positive modulus is kept
/// regardless of what the children claim.
inline Expr min_combine(std::vector<Expr> children, const ProductDomain& domain) {
  detail::require_blocks_match(children, domain, "min_combine");
  for (const Expr& c : children) {
    const Certificate& cert = detail::require_certificate(c, "min_combine");
    detail::require_orientation(cert, Orientation::star_quasiconvex, "min_combine");
    if (c.dimension() != 1)
      throw std::invalid_argument("min_combine: children must be scalar");
    const Interval& iv = c.box().axis(0);
    double tol = 1e-12 * std::max(1.0, std::abs(iv.lo));
    if (std::abs(cert.xbar[0] - iv.lo) > tol)
      throw std::invalid_argument(
          "min_combine: child certificate must sit at the left endpoint of its interval");
  }
  auto node = std::make_shared<detail::ExprNode>();
  node->kind = ExprKind::min;
  node->box = domain.flattened();
  node->offsets = detail::slice_offsets(children);
  node->derived = Certificate(
      detail::concat_xbars(children), 0.0, Orientation::star_quasiconvex,
      detail::rule_provenance("min", detail::any_screened(children), false));
  node->children = std::move(children);
  return Expr(std::move(node));
}

/// Product of strictly positive star-quasiconvex children.
///
/// Without bounds the certificate carries gamma = 0. With bounds engaged the
/// strong form applies: gamma_H = H(xbar) * min_i(gamma_i / M_i) where M_i
/// bounds sup of child i. Pass an empty vector to estimate every M_i from the
/// positivity grid (grid max * (1 + 1e-6)); supplied bounds are validated
/// against the observed suprema. Positivity itself is grid-screened, which
/// makes every product certificate numerically_screened.
inline Expr product(std::vector<Expr> children, const ProductDomain& domain,
                    std::optional<std::vector<double>> bounds = std::nullopt) {
  detail::require_blocks_match(children, domain, "product");
  std::vector<double> gammas;
  std::vector<detail::ValueScreen> screens;
  for (const Expr& c : children) {
    const Certificate& cert = detail::require_certificate(c, "product");
    detail::require_orientation(cert, Orientation::star_quasiconvex, "product");
    gammas.push_back(cert.gamma);
    detail::ValueScreen vs = detail::screen_values(c);
    if (!(vs.min_value > 0.0))
      throw std::invalid_argument("product: child '" + c.label() +
                                  "' is not strictly positive on the screened grid");
    screens.push_back(vs);
  }
  Point xbar = detail::concat_xbars(children);
  double h_at_xbar = 1.0;
  for (std::size_t i = 0; i < children.size(); ++i) {
    const Certificate& cert = *children[i].certificate_ptr();
    h_at_xbar *= children[i].evaluate(cert.xbar);
  }

  double gamma = 0.0;
  std::optional<std::vector<double>> used_bounds;
  if (bounds) {
    std::vector<double> m = *bounds;
    if (m.empty()) {
      for (const auto& vs : screens) m.push_back(vs.max_value * (1.0 + 1e-6));
    } else if (m.size() != children.size()) {
      throw std::invalid_argument("product: bounds list length mismatch");
    } else {
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] < screens[i].max_value)
          throw std::invalid_argument("product: bound below observed supremum of child " +
                                      std::to_string(i));
    }
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.size(); ++i) ratio = std::min(ratio, gammas[i] / m[i]);
    gamma = h_at_xbar * ratio;
    used_bounds = std::move(m);
  }

  auto node = std::make_shared<detail::ExprNode>();
  node->kind = ExprKind::product;
  node->box = domain.flattened();
  node->offsets = detail::slice_offsets(children);
  node->positivity_checked = true;
  node->bounds = std::move(used_bounds);
  node->derived = Certificate(std::move(xbar), gamma, Orientation::star_quasiconvex,
                              Provenance::screened("product"));
  node->children = std::move(children);
  return Expr(std::move(node));
}

/// Product certified through the logarithm: when every ln(child) is
/// star-quasiconvex with the common modulus gamma_log at the child's center,
/// the product carries gamma_H = gamma_log * H(xbar). The log claims are
/// screened here the same way atom claims are.
inline Expr product_via_log(std::vector<Expr> children, const ProductDomain& domain,
                            double gamma_log) {
  if (!(gamma_log >= 0.0))
    throw std::invalid_argument("product_via_log: gamma_log must be >= 0");
  detail::require_blocks_match(children, domain, "product_via_log");
  for (const Expr& c : children) {
    const Certificate& cert = detail::require_certificate(c, "product_via_log");
    detail::require_orientation(cert, Orientation::star_quasiconvex, "product_via_log");
    detail::ValueScreen vs = detail::screen_values(c);
    if (!(vs.min_value > 0.0))
      throw std::invalid_argument("product_via_log: child '" + c.label() +
                                  "' is not strictly positive on the screened grid");
    auto lnc = [&c](const Point& q) { return std::log(c.evaluate(q)); };
    const double anchors[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (const Point& y : sample(c.box(), 200, kScreenSeed))
      for (double lam : anchors) {
        StarSample s = detail::star_sample(lnc, cert.xbar, y, lam, gamma_log,
                                           Orientation::star_quasiconvex);
        if (s.slack < -s.tol)
          throw std::invalid_argument("product_via_log: ln of child '" + c.label() +
                                      "' fails the claimed modulus on screening");
      }
  }
  Point xbar = detail::concat_xbars(children);
  double h_at_xbar = 1.0;
  for (const Expr& c : children) h_at_xbar *= c.evaluate(c.certificate_ptr()->xbar);

  auto node = std::make_shared<detail::ExprNode>();
  node->kind = ExprKind::product;
  node->box = domain.flattened();
  node->offsets = detail::slice_offsets(children);
  node->positivity_checked = true;
  node->derived = Certificate(std::move(xbar), gamma_log * h_at_xbar,
                              Orientation::star_quasiconvex,
                              Provenance::screened("product_log"));
  node->children = std::move(children);
  return Expr(std::move(node));
}

namespace detail {

// Dini infimum of -f over r, for the decreasing-generator chain. Registry
// names get exact formulas; anything else is estimated.
inline DiniEstimate negated_dini(const ScalarTransform& f, const RangeInterval& r) {
  DiniEstimate est;
  if (f.name == "negate") {
    est.mu = 1.0;
    est.is_analytic = true;
    return est;
  }
  if (f.name == "reciprocal") {
    double tmax = std::max(std::abs(r.lo), std::abs(r.hi));
    est.mu = 1.0 / (tmax * tmax);
    est.is_analytic = true;
    return est;
  }
  auto neg = [&f](double t) { return -f.eval(t); };
  est = estimate_dini_inf(neg, r);
  est.mu *= (1.0 - kDiniSafetyShrink);
  est.is_analytic = false;
  return est;
}

// Dini infimum of t -> f_inv(-t) over r (the decreasing case mirror map).
inline DiniEstimate mirror_dini(const ScalarTransform& f,
                                const std::optional<ScalarTransform>& f_inv,
                                const RangeInterval& hull, const RangeInterval& r) {
  DiniEstimate est;
  if (f.name == "negate") {
    est.mu = 1.0;
    est.is_analytic = true;
    return est;
  }
  if (f.name == "reciprocal") {
    double tmax = std::max(std::abs(r.lo), std::abs(r.hi));
    est.mu = 1.0 / (tmax * tmax);
    est.is_analytic = true;
    return est;
  }
  std::function<double(double)> inv;
  if (f_inv)
    inv = f_inv->eval;
  else
    inv = [&f, hull](double s) { return invert_monotone(f.eval, s, hull); };
  auto mirror = [inv](double t) { return inv(-t); };
  est = estimate_dini_inf(mirror, r);
  est.mu *= (1.0 - kDiniSafetyShrink);
  est.is_analytic = false;
  return est;
}

}  // namespace detail

/// Weighted quasi-arithmetic mean f^{-1}(sum_i w_i f(atom_i)).
///
/// Atoms must carry star-quasiconvex certificates. For increasing f the
/// transformed pieces f∘atom_i are star-quasiconvex with modulus
/// gamma_i = dini_inf(f over atom range) * gamma_atom; for decreasing f they
/// are star-quasiconcave with gamma_i = dini_inf(-f) * gamma_atom; either way
/// the mean is star-quasiconvex at the concatenated centers with modulus
/// mu * min_i(w_i * gamma_i), mu the Dini infimum of f^{-1} over the
/// aggregated range S(X) (increasing) or of t -> f^{-1}(-t) over -S(X)
/// (decreasing). With f = identity this collapses to the additive rule.
inline Expr wqam(ScalarTransform f, std::optional<ScalarTransform> f_inv,
                 std::vector<double> weights, std::vector<Expr> atoms) {
  if (atoms.empty()) throw std::invalid_argument("wqam: no atoms");
  if (weights.size() != atoms.size())
    throw std::invalid_argument("wqam: weights/atoms length mismatch");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("wqam: weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("wqam: weights must sum to 1");

  std::vector<detail::ValueScreen> screens;
  for (const Expr& a : atoms) {
    const Certificate& cert = detail::require_certificate(a, "wqam");
    if (cert.orientation != Orientation::star_quasiconvex)
      throw std::invalid_argument(
          "wqam: atom orientation incompatible with the generator requirement");
    screens.push_back(detail::screen_values(a));
  }
  RangeInterval hull = screens[0].widened;
  for (const auto& vs : screens)
    hull = RangeInterval(std::min(hull.lo, vs.widened.lo), std::max(hull.hi, vs.widened.hi));
  detail::screen_monotonicity(f, hull);
  if (f_inv) {
    bool want_increasing = f.monotonicity == Monotonicity::increasing;
    if ((f_inv->monotonicity == Monotonicity::increasing) != want_increasing)
      throw std::invalid_argument("wqam: inverse monotonicity tag must match the generator");
  }

  const bool increasing = f.monotonicity == Monotonicity::increasing;
  bool all_analytic = true;
  double min_weighted_gamma = std::numeric_limits<double>::infinity();
  double s_lo = 0.0, s_hi = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Certificate& cert = *atoms[i].certificate_ptr();
    DiniEstimate piece = increasing ? detail::resolve_dini(f, screens[i].widened)
                                    : detail::negated_dini(f, screens[i].widened);
    all_analytic = all_analytic && piece.is_analytic;
    min_weighted_gamma = std::min(min_weighted_gamma, weights[i] * piece.mu * cert.gamma);
    double fa = f.eval(screens[i].widened.lo), fb = f.eval(screens[i].widened.hi);
    s_lo += weights[i] * std::min(fa, fb);
    s_hi += weights[i] * std::max(fa, fb);
  }
  // Clip the aggregated range to the image of f over the hull: the widening
  // guard can push the endpoints past what bisection can invert, while every
  // value the mean actually takes lies in both sets.
  const double f_hull_lo = f.eval(hull.lo), f_hull_hi = f.eval(hull.hi);
  const double img_lo = std::min(f_hull_lo, f_hull_hi);
  const double img_hi = std::max(f_hull_lo, f_hull_hi);
  RangeInterval s_range(std::max(s_lo, img_lo), std::min(s_hi, img_hi));
  DiniEstimate mu;
  if (increasing) {
    if (f_inv) {
      mu = detail::resolve_dini(*f_inv, s_range);
    } else {
      auto inv = [&f, hull](double s) { return invert_monotone(f.eval, s, hull); };
      mu = estimate_dini_inf(inv, s_range);
      mu.mu *= (1.0 - kDiniSafetyShrink);
      mu.is_analytic = false;
    }
  } else {
    mu = detail::mirror_dini(f, f_inv, hull, RangeInterval(-s_range.hi, -s_range.lo));
  }
  all_analytic = all_analytic && mu.is_analytic;

  auto node = std::make_shared<detail::ExprNode>();
  node->kind = ExprKind::wqam;
  node->box = BoxDomain::concat([&] {
    std::vector<BoxDomain> boxes;
    for (const Expr& a : atoms) boxes.push_back(a.box());
    return boxes;
  }());
  node->offsets = detail::slice_offsets(atoms);
  node->generator = std::move(f);
  node->generator_inverse = std::move(f_inv);
  node->weights = std::move(weights);
  node->derived = Certificate(
      detail::concat_xbars(atoms), mu.mu * min_weighted_gamma, Orientation::star_quasiconvex,
      detail::rule_provenance("wqam", detail::any_screened(atoms), !all_analytic));
  node->children = std::move(atoms);
  return Expr(std::move(node));
}

// ---- diagnostics -------------------------------------------------------------

inline std::string Expr::describe_rules() const {
  const detail::ExprNode& n = *node_;
  std::string head;
  switch (n.kind) {
    case ExprKind::atom:
      return "atom('" + n.label + "')";
    case ExprKind::sum:
      head = "sum";
      break;
    case ExprKind::product:
      head = "product";
      break;
    case ExprKind::min:
      head = "min";
      break;
    case ExprKind::compose:
      head = "compose[" + n.transform.name + "]";
      break;
    case ExprKind::reciprocal:
      head = "reciprocal";
      break;
    case ExprKind::wqam:
      head = "wqam[" + n.generator.name + "]";
      break;
  }
  if (n.derived) head += "{" + n.derived->provenance.describe() + "}";
  head += "(";
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (i) head += ", ";
    head += n.children[i].describe_rules();
  }
  head += ")";
  return head;
}

}  // namespace starqc
