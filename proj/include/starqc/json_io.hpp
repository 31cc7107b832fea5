#pragma once

#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "starqc/corpus.hpp"
#include "starqc/expr.hpp"
#include "starqc/models.hpp"
#include "starqc/verify.hpp"

namespace starqc {

/// Config-shape problem: malformed JSON, missing or mistyped fields, unknown
/// node or family names. Distinct from build failures (screening rejections,
/// precondition violations) thrown by the expression constructors themselves.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace jsonio {

using json = nlohmann::json;

inline const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end())
    throw ParseError(std::string("config: missing field '") + name + "'");
  return *it;
}

inline double number(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number()) throw ParseError(std::string("config: '") + name + "' must be a number");
  return v.get<double>();
}

inline std::vector<double> number_list(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_array()) throw ParseError(std::string("config: '") + name + "' must be an array");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number())
      throw ParseError(std::string("config: '") + name + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline Interval interval_from(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ParseError(std::string("config: '") + name + "' must be [lo, hi]");
  return Interval(v[0].get<double>(), v[1].get<double>());
}

inline std::vector<Interval> interval_list(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_array()) throw ParseError(std::string("config: '") + name + "' must be an array");
  std::vector<Interval> out;
  for (const json& x : v) {
    if (!x.is_array() || x.size() != 2 || !x[0].is_number() || !x[1].is_number())
      throw ParseError(std::string("config: '") + name + "' entries must be [lo, hi]");
    out.push_back(Interval(x[0].get<double>(), x[1].get<double>()));
  }
  return out;
}

inline ProductDomain box_domain(const json& j, const char* name) {
  std::vector<BoxDomain> blocks;
  for (const Interval& iv : interval_list(j, name)) blocks.push_back(BoxDomain({iv}));
  return ProductDomain(std::move(blocks));
}

inline Orientation orientation_from(const json& j) {
  std::string s = j.get<std::string>();
  if (s == "star_quasiconvex") return Orientation::star_quasiconvex;
  if (s == "star_quasiconcave") return Orientation::star_quasiconcave;
  throw ParseError("config: unknown orientation '" + s + "'");
}

inline Certificate certificate_from(const json& j) {
  std::vector<double> xbar = number_list(j, "xbar");
  double gamma = number(j, "gamma");
  Orientation o = Orientation::star_quasiconvex;
  if (j.contains("orientation")) o = orientation_from(j.at("orientation"));
  return Certificate(Point(xbar.begin(), xbar.end()), gamma, o, Provenance::claimed());
}

inline ScalarTransform transform_from(const json& j) {
  if (j.is_string()) return make_transform(j.get<std::string>(), std::nullopt);
  if (j.is_object()) {
    std::string name = field(j, "name").get<std::string>();
    std::optional<double> param;
    if (j.contains("param")) param = j.at("param").get<double>();
    return make_transform(name, param);
  }
  throw ParseError("config: transform must be a name or {name, param}");
}

/// The 1-D atom families reachable from configs. Each returns a plain
/// double -> double evaluator.
inline std::function<double(double)> atom_family(const std::string& family, const json& p) {
  if (family == "linear") {
    double a = number(p, "a"), b = number(p, "b");
    return [a, b](double t) { return a * t + b; };
  }
  if (family == "power") {
    double exponent = number(p, "p");
    double scale = p.contains("scale") ? p.at("scale").get<double>() : 1.0;
    return [scale, exponent](double t) { return scale * std::pow(t, exponent); };
  }
  if (family == "log") {
    double coeff = number(p, "coeff");
    double shift = p.contains("shift") ? p.at("shift").get<double>() : 0.0;
    return [coeff, shift](double t) { return coeff * std::log(t) + shift; };
  }
  if (family == "exp") {
    double coeff = number(p, "coeff"), rate = number(p, "rate");
    return [coeff, rate](double t) { return coeff * std::exp(rate * t); };
  }
  if (family == "prospect_piece") {
    double alpha = number(p, "alpha"), beta = number(p, "beta");
    double lam = number(p, "lam"), pi = number(p, "pi");
    return [alpha, beta, lam, pi](double t) {
      return pi * prospect_utility(t, alpha, beta, lam);
    };
  }
  if (family == "constant") {
    double value = number(p, "value");
    return [value](double) { return value; };
  }
  throw ParseError("config: unknown atom family '" + family + "'");
}

inline Expr expr_from_json(const json& j);

inline std::vector<Expr> children_from(const json& j) {
  const json& v = field(j, "children");
  if (!v.is_array() || v.empty())
    throw ParseError("config: 'children' must be a non-empty array");
  std::vector<Expr> out;
  for (const json& c : v) out.push_back(expr_from_json(c));
  return out;
}

inline ProductDomain concat_blocks(const std::vector<Expr>& children) {
  std::vector<BoxDomain> blocks;
  for (const Expr& c : children) blocks.push_back(c.box());
  return ProductDomain(std::move(blocks));
}

inline Expr expr_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("config: expression node must be an object");
  std::string node = field(j, "node").get<std::string>();

  if (node == "atom") {
    std::string family = field(j, "family").get<std::string>();
    auto f = atom_family(family, field(j, "params"));
    Interval box = interval_from(j, "box");
    std::optional<Certificate> claim;
    if (j.contains("certificate")) claim = certificate_from(j.at("certificate"));
    std::string label = j.contains("label") ? j.at("label").get<std::string>() : family;
    bool trusted = j.contains("trusted") && j.at("trusted").get<bool>();
    return make_scalar_atom(std::move(f), box, std::move(claim), std::move(label), trusted);
  }
  if (node == "sum") {
    std::vector<Expr> ch = children_from(j);
    ProductDomain dom = concat_blocks(ch);
    return sum(std::move(ch), dom);
  }
  if (node == "min") {
    std::vector<Expr> ch = children_from(j);
    ProductDomain dom = concat_blocks(ch);
    return min_combine(std::move(ch), dom);
  }
  if (node == "product") {
    std::vector<Expr> ch = children_from(j);
    ProductDomain dom = concat_blocks(ch);
    std::optional<std::vector<double>> bounds;
    if (j.contains("bounds")) {
      const json& b = j.at("bounds");
      if (b.is_string() && b.get<std::string>() == "estimate")
        bounds = std::vector<double>{};
      else if (b.is_array())
        bounds = number_list(j, "bounds");
      else
        throw ParseError("config: 'bounds' must be an array or \"estimate\"");
    }
    return product(std::move(ch), dom, std::move(bounds));
  }
  if (node == "product_log") {
    std::vector<Expr> ch = children_from(j);
    ProductDomain dom = concat_blocks(ch);
    return product_via_log(std::move(ch), dom, number(j, "gamma_log"));
  }
  if (node == "compose")
    return compose_monotone(transform_from(field(j, "transform")),
                            expr_from_json(field(j, "child")));
  if (node == "reciprocal") return reciprocal(expr_from_json(field(j, "child")));
  if (node == "wqam") {
    const json& gspec = field(j, "generator");
    ScalarTransform f = transform_from(gspec);
    std::optional<double> gparam;
    if (gspec.is_object() && gspec.contains("param"))
      gparam = gspec.at("param").get<double>();
    std::optional<ScalarTransform> f_inv;
    if (j.contains("inverse") && !j.at("inverse").is_null())
      f_inv = transform_from(j.at("inverse"));
    else
      f_inv = registry_inverse(f, gparam);
    return wqam(std::move(f), std::move(f_inv), number_list(j, "weights"),
                children_from(j));
  }
  if (node == "prospect") {
    ProspectParams params;
    const json& pieces = field(j, "pieces");
    if (!pieces.is_array() || pieces.empty())
      throw ParseError("config: 'pieces' must be a non-empty array");
    for (const json& p : pieces) {
      ProspectPiece piece;
      piece.alpha = number(p, "alpha");
      piece.beta = number(p, "beta");
      piece.lam = number(p, "lam");
      piece.prob = number(p, "prob");
      piece.support = interval_from(p, "box");
      params.pieces.push_back(piece);
    }
    if (j.contains("weighting")) {
      const json& w = j.at("weighting");
      std::string kind = field(w, "kind").get<std::string>();
      if (kind == "inverse_s")
        params.weighting = inverse_s_weighting(number(w, "c"));
      else if (kind != "identity")
        throw ParseError("config: unknown weighting kind '" + kind + "'");
    }
    return prospect_value(params);
  }
  if (node == "cobb_douglas")
    return cobb_douglas(number(j, "A"), number_list(j, "alphas"), box_domain(j, "box"));
  if (node == "leontief")
    return leontief(number(j, "alpha"), number_list(j, "alphas"), box_domain(j, "box"));
  if (node == "ratio_log") {
    RatioParams p;
    p.c = j.contains("c") ? j.at("c").get<double>() : 1.0;
    p.d = j.contains("d") ? j.at("d").get<double>() : 1.0;
    p.alphas = number_list(j, "alphas");
    p.betas = number_list(j, "betas");
    p.x_box = interval_list(j, "x_box");
    p.y_box = interval_list(j, "y_box");
    return ratio_log_expr(p);
  }
  if (node == "cfmm_pool") {
    std::vector<double> weights;
    if (j.contains("weights")) weights = number_list(j, "weights");
    CfmmState pool = cfmm_geometric_pool(number_list(j, "reserves"), number(j, "fee"),
                                         std::move(weights));
    return pool.phi;
  }
  if (node == "corpus") {
    std::string name = field(j, "name").get<std::string>();
    for (CorpusEntry& e : builtin_corpus())
      if (e.name == name) return std::move(e.expr);
    throw ParseError("config: unknown corpus entry '" + name + "'");
  }
  throw ParseError("config: unknown node kind '" + node + "'");
}

}  // namespace jsonio

/// Parse a full config document: {"schema": 1, "expression": {...}}.
inline Expr load_expression(const std::string& text) {
  jsonio::json doc;
  try {
    doc = jsonio::json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config: top level must be an object");
  if (jsonio::field(doc, "schema").get<int>() != 1)
    throw ParseError("config: unsupported schema version");
  return jsonio::expr_from_json(jsonio::field(doc, "expression"));
}

// ---- output formatting --------------------------------------------------------

/// Shortest round-trippable decimal; used everywhere a double reaches a file
/// so identical runs stay byte-identical.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json point_to_json(const Point& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : p) arr.push_back(v);
  return arr;
}

inline nlohmann::json certificate_to_json(const Certificate& c) {
  return nlohmann::json{{"xbar", point_to_json(c.xbar)},
                        {"gamma", c.gamma},
                        {"orientation", to_string(c.orientation)},
                        {"provenance", c.provenance.describe()}};
}

inline nlohmann::json witness_to_json(const Witness& w) {
  return nlohmann::json{{"x", point_to_json(w.x)},
                        {"y", point_to_json(w.y)},
                        {"lambda", w.lambda},
                        {"lhs", w.lhs},
                        {"rhs", w.rhs}};
}

inline nlohmann::json report_to_json(const VerificationReport& r) {
  nlohmann::json j{{"property", r.property},
                   {"passed", r.passed},
                   {"samples_used", r.samples_used},
                   {"worst_slack", r.worst_slack},
                   {"tolerance", r.tolerance},
                   {"seed", r.seed}};
  j["witness"] = r.witness ? witness_to_json(*r.witness) : nlohmann::json();
  return j;
}

}  // namespace starqc
