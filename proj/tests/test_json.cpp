#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "expected.hpp"
#include "starqc/json_io.hpp"

using namespace starqc;
using nlohmann::json;

TEST(LoadExpression, AtomWithCertificate) {
  Expr e = load_expression(R"({
    "schema": 1,
    "expression": {
      "node": "atom", "family": "linear", "params": {"a": 3.0, "b": 1.0},
      "box": [0.0, 2.0],
      "certificate": {"xbar": [0.0], "gamma": 3.0},
      "label": "steep"
    }
  })");
  EXPECT_DOUBLE_EQ(e.evaluate(Point{1.0}), 4.0);
  Certificate c = *e.certificate();
  EXPECT_DOUBLE_EQ(c.gamma, 3.0);
  EXPECT_EQ(c.xbar, (Point{0.0}));
  EXPECT_EQ(e.label(), "steep");
}

TEST(LoadExpression, SumAndCompose) {
  Expr e = load_expression(R"({
    "schema": 1,
    "expression": {
      "node": "compose",
      "transform": "ln",
      "child": {
        "node": "sum",
        "children": [
          {"node": "atom", "family": "linear", "params": {"a": 1.0, "b": 0.0},
           "box": [1.0, 3.0], "certificate": {"xbar": [1.0], "gamma": 1.0}},
          {"node": "atom", "family": "power", "params": {"p": 2.0},
           "box": [1.0, 2.0], "certificate": {"xbar": [1.0], "gamma": 0.0}}
        ]
      }
    }
  })");
  EXPECT_EQ(e.dimension(), 2u);
  EXPECT_NEAR(e.evaluate(Point{2.0, 1.0}), std::log(3.0), 1e-12);
  Certificate c = *e.certificate();
  EXPECT_EQ(c.xbar, (Point{1.0, 1.0}));
  EXPECT_EQ(c.provenance.kind, Provenance::Kind::derived_rule);
}

TEST(LoadExpression, WqamUsesRegistryInverse) {
  Expr e = load_expression(R"({
    "schema": 1,
    "expression": {
      "node": "wqam", "generator": "ln", "weights": [0.5, 0.5],
      "children": [
        {"node": "atom", "family": "linear", "params": {"a": 1.0, "b": 0.0},
         "box": [1.0, 4.0], "certificate": {"xbar": [1.0], "gamma": 0.0}},
        {"node": "atom", "family": "linear", "params": {"a": 1.0, "b": 0.0},
         "box": [1.0, 4.0], "certificate": {"xbar": [1.0], "gamma": 0.0}}
      ]
    }
  })");
  EXPECT_NEAR(e.evaluate(Point{1.0, 4.0}), 2.0, 1e-9);  // geometric mean
  EXPECT_NEAR(e.evaluate(Point{2.0, 2.0}), 2.0, 1e-12);
}

TEST(LoadExpression, ProductBoundsForms) {
  const char* tpl = R"({
    "schema": 1,
    "expression": {
      "node": "product", %BOUNDS%
      "children": [
        {"node": "atom", "family": "linear", "params": {"a": 1.0, "b": 0.0},
         "box": [1.0, 2.0], "certificate": {"xbar": [1.0], "gamma": 1.0}},
        {"node": "atom", "family": "linear", "params": {"a": 1.0, "b": 0.0},
         "box": [1.0, 2.0], "certificate": {"xbar": [1.0], "gamma": 1.0}}
      ]
    }
  })";
  auto gamma_with = [tpl](const std::string& bounds) {
    std::string s = tpl;
    Expr e = load_expression(s.replace(s.find("%BOUNDS%"), 8, bounds));
    return e.certificate()->gamma;
  };
  EXPECT_DOUBLE_EQ(gamma_with(""), 0.0);
  EXPECT_GT(gamma_with(R"("bounds": [2.0, 2.0],)"), 0.0);
  EXPECT_GT(gamma_with(R"("bounds": "estimate",)"), 0.0);
}

TEST(LoadExpression, BuildersMatchDirectConstruction) {
  Expr viaJson = load_expression(R"({
    "schema": 1,
    "expression": {
      "node": "prospect",
      "pieces": [
        {"alpha": 0.88, "beta": 0.88, "lam": 2.25, "prob": 0.5, "box": [-5.0, 5.0]},
        {"alpha": 0.88, "beta": 0.88, "lam": 2.25, "prob": 0.5, "box": [-5.0, 5.0]}
      ]
    }
  })");
  Expr direct = prospect_value(prospect_defaults(2));
  for (double t : {-5.0, -1.0, 0.0, 2.5, 5.0})
    EXPECT_DOUBLE_EQ(viaJson.evaluate(Point{t, -t}), direct.evaluate(Point{t, -t}));

  Expr cd = load_expression(R"({
    "schema": 1,
    "expression": {"node": "cobb_douglas", "A": 2.0, "alphas": [0.5, 0.5],
                   "box": [[1.0, 9.0], [1.0, 16.0]]}
  })");
  EXPECT_NEAR(cd.evaluate(Point{4.0, 9.0}), 12.0, 1e-12);

  Expr ratio = load_expression(R"({
    "schema": 1,
    "expression": {"node": "ratio_log", "alphas": [1.0], "betas": [1.0],
                   "x_box": [[1.0, 2.0]], "y_box": [[1.0, 2.0]]}
  })");
  EXPECT_NEAR(ratio.evaluate(Point{2.0, 1.0}), expected::ratio_min_value, 1e-12);

  Expr pool = load_expression(R"({
    "schema": 1,
    "expression": {"node": "cfmm_pool", "reserves": [100.0, 100.0], "fee": 1.0}
  })");
  EXPECT_NEAR(pool.evaluate(Point{100.0, 100.0}), 100.0, 1e-9);

  Expr corpus = load_expression(R"({
    "schema": 1,
    "expression": {"node": "corpus", "name": "geometric_mean"}
  })");
  EXPECT_NEAR(corpus.evaluate(Point{1.0, 4.0}), 2.0, 1e-9);
}

TEST(LoadExpression, ParseErrors) {
  EXPECT_THROW(load_expression("not json"), ParseError);
  EXPECT_THROW(load_expression("[1,2]"), ParseError);
  EXPECT_THROW(load_expression(R"({"schema": 2, "expression": {}})"), ParseError);
  EXPECT_THROW(load_expression(R"({"schema": 1})"), ParseError);
  EXPECT_THROW(load_expression(R"({"schema": 1, "expression": {"node": "nope"}})"),
               ParseError);
  EXPECT_THROW(load_expression(R"({
    "schema": 1,
    "expression": {"node": "atom", "family": "mystery", "params": {}, "box": [0, 1]}
  })"),
               ParseError);
  EXPECT_THROW(load_expression(R"({
    "schema": 1,
    "expression": {"node": "corpus", "name": "missing_entry"}
  })"),
               ParseError);
  EXPECT_THROW(load_expression(R"({
    "schema": 1,
    "expression": {"node": "atom", "family": "linear", "params": {"a": 1, "b": 0},
                   "box": [0, 1],
                   "certificate": {"xbar": [0], "gamma": 0, "orientation": "sideways"}}
  })"),
               ParseError);
}

TEST(LoadExpression, BuildErrorsAreNotParseErrors) {
  // A false claim rejected by screening is a build failure, not a config
  // shape problem.
  const char* falseClaim = R"({
    "schema": 1,
    "expression": {"node": "atom", "family": "linear", "params": {"a": 1.0, "b": 0.0},
                   "box": [0.0, 1.0], "certificate": {"xbar": [0.0], "gamma": 50.0}}
  })";
  EXPECT_THROW(load_expression(falseClaim), std::invalid_argument);
  try {
    load_expression(falseClaim);
  } catch (const ParseError&) {
    FAIL() << "screening rejection surfaced as ParseError";
  } catch (const std::invalid_argument&) {
  }
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(-2.5), "-2.5");
  for (double v : {3.141592653589793, 1e-300, -7.0, 0.3333333333333333}) {
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
}

TEST(ReportJson, FieldsSerialize) {
  Certificate c({1.0, 2.0}, 0.5, Orientation::star_quasiconvex,
                Provenance::derived("additive"));
  json jc = certificate_to_json(c);
  EXPECT_EQ(jc["xbar"], (json::array({1.0, 2.0})));
  EXPECT_EQ(jc["gamma"], 0.5);
  EXPECT_EQ(jc["orientation"], "star_quasiconvex");
  EXPECT_EQ(jc["provenance"], "derived_rule(additive)");

  VerificationReport r;
  r.property = "star_inequality";
  r.passed = false;
  r.samples_used = 42;
  r.worst_slack = -0.25;
  r.tolerance = 1e-9;
  r.witness = Witness{{0.0}, {3.0}, 0.5, 0.69, 0.59};
  json jr = report_to_json(r);
  EXPECT_EQ(jr["passed"], false);
  EXPECT_EQ(jr["samples_used"], 42);
  EXPECT_EQ(jr["witness"]["lambda"], 0.5);

  r.witness.reset();
  EXPECT_TRUE(report_to_json(r)["witness"].is_null());
}
