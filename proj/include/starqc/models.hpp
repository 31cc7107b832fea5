#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "starqc/expr.hpp"

namespace starqc {

// ---- prospect theory values ---------------------------------------------------

/// One outcome coordinate of a prospect value function: the S-shaped utility
///   u(x) = x^alpha        for x >= 0
///   u(x) = -lam*(-x)^beta for x < 0
/// weighted by a decision weight derived from the outcome probability.
struct ProspectPiece {
  double alpha{0.88};
  double beta{0.88};
  double lam{2.25};       // loss aversion, > 1
  double prob{0.5};       // raw probability, weights must cover it
  Interval support{-5.0, 5.0};
};

struct ProspectParams {
  std::vector<ProspectPiece> pieces;
  /// Probability weighting w: [0,1] -> (0,1]; identity when empty.
  std::function<double(double)> weighting;
};

/// One-parameter inverse-S weighting w(p) = p^c / (p^c + (1-p)^c)^(1/c).
/// Overweights small probabilities for c < 1.
inline std::function<double(double)> inverse_s_weighting(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("inverse_s_weighting: c must be > 0");
  return [c](double p) {
    double num = std::pow(p, c);
    double den = std::pow(std::pow(p, c) + std::pow(1.0 - p, c), 1.0 / c);
    return num / den;
  };
}

/// Equal-probability pieces with the classical parameter estimates
/// (alpha = beta = 0.88, lam = 2.25), one per coordinate.
inline ProspectParams prospect_defaults(std::size_t n = 2,
                                        Interval support = Interval(-5.0, 5.0)) {
  if (n == 0) throw std::invalid_argument("prospect_defaults: need at least one piece");
  ProspectParams p;
  for (std::size_t i = 0; i < n; ++i) {
    ProspectPiece piece;
    piece.prob = 1.0 / static_cast<double>(n);
    piece.support = support;
    p.pieces.push_back(piece);
  }
  return p;
}

inline double prospect_utility(double x, double alpha, double beta, double lam) {
  return x >= 0.0 ? std::pow(x, alpha) : -lam * std::pow(-x, beta);
}

/// V(x_1,...,x_n) = sum_i pi_i u_i(x_i). Every weighted piece is nondecreasing
/// on its interval, so each atom carries a sound gamma = 0 certificate at the
/// left endpoint and the additive rule certifies V at (a_1,...,a_n).
inline Expr prospect_value(const ProspectParams& params) {
  if (params.pieces.empty())
    throw std::invalid_argument("prospect_value: need at least one piece");
  double prob_sum = 0.0;
  for (const ProspectPiece& p : params.pieces) {
    if (!(p.alpha > 0.0 && p.alpha < 1.0) || !(p.beta > 0.0 && p.beta < 1.0))
      throw std::invalid_argument("prospect_value: alpha and beta must lie in (0,1)");
    if (!(p.lam > 1.0)) throw std::invalid_argument("prospect_value: lam must be > 1");
    if (!(p.prob > 0.0)) throw std::invalid_argument("prospect_value: prob must be > 0");
    prob_sum += p.prob;
  }
  if (std::abs(prob_sum - 1.0) > 1e-9)
    throw std::invalid_argument("prospect_value: probabilities must sum to 1");

  std::vector<Expr> atoms;
  std::vector<BoxDomain> blocks;
  for (std::size_t i = 0; i < params.pieces.size(); ++i) {
    const ProspectPiece& p = params.pieces[i];
    double pi = params.weighting ? params.weighting(p.prob) : p.prob;
    if (!(pi > 0.0)) throw std::invalid_argument("prospect_value: weighting gave pi <= 0");
    auto u = [pi, a = p.alpha, b = p.beta, l = p.lam](double t) {
      return pi * prospect_utility(t, a, b, l);
    };
    Certificate claim({p.support.lo}, 0.0, Orientation::star_quasiconvex,
                      Provenance::claimed());
    atoms.push_back(make_scalar_atom(u, p.support, claim,
                                     "prospect_piece_" + std::to_string(i + 1)));
    blocks.push_back(BoxDomain({p.support}));
  }
  return sum(std::move(atoms), ProductDomain(std::move(blocks)));
}

// ---- production functions -----------------------------------------------------

namespace detail {

inline void require_positive_box(const ProductDomain& box, std::size_t n, const char* who) {
  if (box.block_count() != n)
    throw std::invalid_argument(std::string(who) + ": box block count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (box.block(i).dimension() != 1)
      throw std::invalid_argument(std::string(who) + ": box blocks must be intervals");
    if (!(box.block(i).axis(0).lo > 0.0))
      throw std::invalid_argument(std::string(who) + ": box must have positive lower bounds");
  }
}

}  // namespace detail

/// Cobb-Douglas H(x) = A * prod_i x_i^{alpha_i} on a positive box, certified
/// star-quasiconvex with gamma = 0 at the lower corner (each factor is
/// increasing). A is folded into the first factor.
inline Expr cobb_douglas(double A, const std::vector<double>& alphas,
                         const ProductDomain& box) {
  if (!(A > 0.0)) throw std::invalid_argument("cobb_douglas: A must be > 0");
  if (alphas.empty()) throw std::invalid_argument("cobb_douglas: need at least one factor");
  for (double a : alphas)
    if (!(a > 0.0)) throw std::invalid_argument("cobb_douglas: exponents must be > 0");
  detail::require_positive_box(box, alphas.size(), "cobb_douglas");

  std::vector<Expr> factors;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const Interval iv = box.block(i).axis(0);
    double scale = i == 0 ? A : 1.0;
    auto f = [scale, p = alphas[i]](double t) { return scale * std::pow(t, p); };
    Certificate claim({iv.lo}, 0.0, Orientation::star_quasiconvex, Provenance::claimed());
    factors.push_back(
        make_scalar_atom(f, iv, claim, "x" + std::to_string(i + 1) + "^a"));
  }
  return product(std::move(factors), box, std::nullopt);
}

/// Leontief h_L(x) = min_i{(1/alpha_i) x_i}^alpha, built as a monotone power
/// over a min of linear atoms; the min rule pins gamma = 0 at the lower corner
/// and the composition keeps it.
inline Expr leontief(double alpha, const std::vector<double>& alphas,
                     const ProductDomain& box) {
  if (!(alpha > 0.0)) throw std::invalid_argument("leontief: alpha must be > 0");
  if (alphas.empty()) throw std::invalid_argument("leontief: need at least one input");
  for (double a : alphas)
    if (!(a > 0.0)) throw std::invalid_argument("leontief: input weights must be > 0");
  detail::require_positive_box(box, alphas.size(), "leontief");

  std::vector<Expr> legs;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const Interval iv = box.block(i).axis(0);
    auto f = [w = alphas[i]](double t) { return t / w; };
    Certificate claim({iv.lo}, 0.0, Orientation::star_quasiconvex, Provenance::claimed());
    legs.push_back(make_scalar_atom(f, iv, claim, "x" + std::to_string(i + 1) + "/a"));
  }
  return compose_monotone(power_transform(alpha), min_combine(std::move(legs), box));
}

// ---- constant function market makers --------------------------------------------

/// Reserves, fee, and the trading function of a pool. A trade is valid when
/// it preserves the invariant, phi(R + fee*y - x) = phi(R): y is paid in
/// (scaled by the fee), x is taken out.
struct CfmmState {
  std::vector<double> reserves;
  double gamma_fee{1.0};
  Expr phi;
};

/// Geometric-mean pool: phi(R) = exp(sum_i w_i ln R_i). Equal weights unless
/// given. The expression domain spans [R_i * 1e-9, R_i * 1e4] per asset so
/// post-trade states stay evaluable.
inline CfmmState cfmm_geometric_pool(std::vector<double> reserves, double fee,
                                     std::vector<double> weights = {}) {
  if (reserves.size() < 2)
    throw std::invalid_argument("cfmm_geometric_pool: need at least two assets");
  for (double r : reserves)
    if (!(r > 0.0)) throw std::invalid_argument("cfmm_geometric_pool: reserves must be > 0");
  if (!(fee > 0.0 && fee <= 1.0))
    throw std::invalid_argument("cfmm_geometric_pool: fee must lie in (0,1]");
  if (weights.empty())
    weights.assign(reserves.size(), 1.0 / static_cast<double>(reserves.size()));
  if (weights.size() != reserves.size())
    throw std::invalid_argument("cfmm_geometric_pool: weights/reserves length mismatch");

  std::vector<Expr> atoms;
  for (std::size_t i = 0; i < reserves.size(); ++i) {
    Interval iv(reserves[i] * 1e-9, reserves[i] * 1e4);
    Certificate claim({iv.lo}, 0.0, Orientation::star_quasiconvex, Provenance::claimed());
    atoms.push_back(make_scalar_atom([](double t) { return t; }, iv, claim,
                                     "R" + std::to_string(i + 1)));
  }
  Expr phi = wqam(ln_transform(), exp_transform(), std::move(weights), std::move(atoms));
  return CfmmState{std::move(reserves), fee, std::move(phi)};
}

/// True iff the post-trade reserves preserve the trading function to within
/// 1e-9 relative. x is the payout vector, y the payment vector.
inline bool cfmm_validate_trade(const CfmmState& state, const std::vector<double>& x,
                                const std::vector<double>& y) {
  const std::size_t n = state.reserves.size();
  if (x.size() != n || y.size() != n)
    throw std::invalid_argument("cfmm_validate_trade: vector length mismatch");
  Point post(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] >= 0.0) || !(y[i] >= 0.0))
      throw std::invalid_argument("cfmm_validate_trade: trade vectors must be nonnegative");
    post[i] = state.reserves[i] + state.gamma_fee * y[i] - x[i];
    if (!(post[i] > 0.0))
      throw std::invalid_argument("cfmm_validate_trade: post-trade reserves nonpositive");
  }
  double before = state.phi.evaluate(Point(state.reserves.begin(), state.reserves.end()));
  double after = state.phi.evaluate(post);
  return std::abs(after - before) <= 1e-9 * (1.0 + std::abs(before));
}

/// Output amount delta of receive_asset such that paying pay_amount of
/// pay_asset preserves phi, found by bisection on the strictly decreasing
/// delta -> phi(post-trade) to 1e-12 relative width.
inline double cfmm_solve_output(const CfmmState& state, std::size_t pay_asset,
                                double pay_amount, std::size_t receive_asset) {
  const std::size_t n = state.reserves.size();
  if (pay_asset >= n || receive_asset >= n)
    throw std::invalid_argument("cfmm_solve_output: asset index out of range");
  if (pay_asset == receive_asset)
    throw std::invalid_argument("cfmm_solve_output: pay and receive assets must differ");
  if (!(pay_amount > 0.0))
    throw std::invalid_argument("cfmm_solve_output: pay amount must be > 0");

  Point base(state.reserves.begin(), state.reserves.end());
  double target = state.phi.evaluate(base);
  Point post = base;
  post[pay_asset] += state.gamma_fee * pay_amount;
  auto value_at = [&](double delta) {
    Point p = post;
    p[receive_asset] -= delta;
    return state.phi.evaluate(p);
  };

  const double r_recv = state.reserves[receive_asset];
  double lo = 0.0, hi = r_recv * (1.0 - 1e-9);
  if (!(value_at(hi) < target))
    throw std::invalid_argument("cfmm_solve_output: no root in (0, R_receive)");
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (value_at(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---- ratio (benefit over risk) model --------------------------------------------

/// Parameters of the log-transformed ratio objective
///   L(x, y) = ln d - ln c + sum_j beta_j ln y_j - sum_i alpha_i ln x_i,
/// the minimization form of maximizing c prod x_i^{alpha_i} over
/// d prod y_j^{beta_j}. Benefit factors x (m of them), risk factors y (l of
/// them, any number).
struct RatioParams {
  double c{1.0};
  double d{1.0};
  std::vector<double> alphas;    // benefit exponents, one per x_i
  std::vector<double> betas;     // risk exponents, one per y_j
  std::vector<Interval> x_box;   // positive lower bounds
  std::vector<Interval> y_box;
};

/// Sum of m decreasing atoms -alpha_i ln x_i (minimized at the right
/// endpoints) and l increasing atoms beta_j ln y_j (minimized at the left
/// endpoints), the constant folded into the first atom. The additive rule
/// gives gamma = 0 at (b_1,...,b_m, a_1,...,a_l); no bound on l.
inline Expr ratio_log_expr(const RatioParams& params) {
  if (!(params.c > 0.0 && params.d > 0.0))
    throw std::invalid_argument("ratio_log_expr: c and d must be > 0");
  if (params.alphas.empty() || params.betas.empty())
    throw std::invalid_argument("ratio_log_expr: need at least one benefit and one risk");
  if (params.x_box.size() != params.alphas.size() ||
      params.y_box.size() != params.betas.size())
    throw std::invalid_argument("ratio_log_expr: box/exponent length mismatch");
  for (double a : params.alphas)
    if (!(a > 0.0)) throw std::invalid_argument("ratio_log_expr: exponents must be > 0");
  for (double b : params.betas)
    if (!(b > 0.0)) throw std::invalid_argument("ratio_log_expr: exponents must be > 0");
  for (const Interval& iv : params.x_box)
    if (!(iv.lo > 0.0))
      throw std::invalid_argument("ratio_log_expr: boxes need positive lower bounds");
  for (const Interval& iv : params.y_box)
    if (!(iv.lo > 0.0))
      throw std::invalid_argument("ratio_log_expr: boxes need positive lower bounds");

  const double constant = std::log(params.d) - std::log(params.c);
  std::vector<Expr> atoms;
  std::vector<BoxDomain> blocks;
  for (std::size_t i = 0; i < params.alphas.size(); ++i) {
    const Interval iv = params.x_box[i];
    double shift = i == 0 ? constant : 0.0;
    auto f = [a = params.alphas[i], shift](double t) { return shift - a * std::log(t); };
    Certificate claim({iv.hi}, 0.0, Orientation::star_quasiconvex, Provenance::claimed());
    atoms.push_back(
        make_scalar_atom(f, iv, claim, "-a" + std::to_string(i + 1) + "*ln(x)"));
    blocks.push_back(BoxDomain({iv}));
  }
  for (std::size_t j = 0; j < params.betas.size(); ++j) {
    const Interval iv = params.y_box[j];
    auto f = [b = params.betas[j]](double t) { return b * std::log(t); };
    Certificate claim({iv.lo}, 0.0, Orientation::star_quasiconvex, Provenance::claimed());
    atoms.push_back(
        make_scalar_atom(f, iv, claim, "b" + std::to_string(j + 1) + "*ln(y)"));
    blocks.push_back(BoxDomain({iv}));
  }
  return sum(std::move(atoms), ProductDomain(std::move(blocks)));
}

}  // namespace starqc
