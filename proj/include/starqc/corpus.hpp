#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "starqc/expr.hpp"
#include "starqc/models.hpp"

namespace starqc {

/// What the default-budget checks (seed 0) are expected to say about an
/// entry. quasiconvex_falsified refers to the pairwise falsifier finding a
/// witness; minimizer_ok means no sampled point beats the certified center.
struct CorpusVerdicts {
  bool star_pass{true};
  bool quasiconvex_falsified{false};
  bool minimizer_ok{true};
};

struct CorpusEntry {
  std::string name;
  Expr expr;
  Certificate certificate;
  CorpusVerdicts expected;
  std::string note;
};

namespace detail {

inline Expr corpus_identity_atom(double lo, double hi, double gamma) {
  Certificate claim({lo}, gamma, Orientation::star_quasiconvex, Provenance::claimed());
  return make_scalar_atom([](double t) { return t; }, Interval(lo, hi), claim, "t");
}

inline ProductDomain square(Interval iv) {
  return ProductDomain({BoxDomain({iv}), BoxDomain({iv})});
}

}  // namespace detail

/// Regression corpus: every worked example with hand-checked expected
/// verdicts, plus negative controls (a trusted false modulus claim and a
/// trusted false center claim) that the checkers must catch.
inline std::vector<CorpusEntry> builtin_corpus() {
  std::vector<CorpusEntry> out;
  auto add = [&out](std::string name, Expr e, CorpusVerdicts v, std::string note) {
    Certificate c = *e.certificate();
    out.push_back(CorpusEntry{std::move(name), std::move(e), std::move(c), v,
                              std::move(note)});
  };

  // S-shaped value function: star at the lower corner, yet the segment
  // between the two mixed-sign corners rises above both ends.
  add("prospect_tk", prospect_value(prospect_defaults(2)), {true, true, true},
      "sum of S-shaped pieces; not quasiconvex across gain/loss corners");

  add("cobb_douglas_unit", cobb_douglas(1.0, {1.0, 1.0}, detail::square(Interval(1, 2))),
      {true, true, true}, "x1*x2 on [1,2]^2; midpoint of (1,2),(2,1) gives 2.25 > 2");

  add("leontief_cubed", leontief(3.0, {1.0, 1.0}, detail::square(Interval(1, 2))),
      {true, true, true}, "min(x1,x2)^3; sublevel sets are L-shaped");

  {
    std::vector<Expr> atoms;
    atoms.push_back(detail::corpus_identity_atom(1, 4, 0.0));
    atoms.push_back(detail::corpus_identity_atom(1, 4, 0.0));
    add("geometric_mean", wqam(ln_transform(), exp_transform(), {0.5, 0.5}, std::move(atoms)),
        {true, true, true}, "sqrt(x1*x2) on [1,4]^2; the dichotomy example");
  }
  {
    std::vector<Expr> atoms;
    atoms.push_back(detail::corpus_identity_atom(1, 4, 0.0));
    atoms.push_back(detail::corpus_identity_atom(1, 4, 0.0));
    add("arithmetic_mean", wqam(identity_transform(), identity_transform(), {0.5, 0.5},
                                std::move(atoms)),
        {true, false, true}, "linear, hence quasiconvex; falsifier finds nothing");
  }
  {
    std::vector<Expr> atoms;
    atoms.push_back(detail::corpus_identity_atom(1, 2, 2.0));
    atoms.push_back(detail::corpus_identity_atom(1, 2, 2.0));
    add("harmonic_mean", wqam(reciprocal_transform(), reciprocal_transform(), {0.5, 0.5},
                              std::move(atoms)),
        {true, true, true}, "concave mean; midpoint of (2,1),(1,2) gives 1.5 > 4/3");
  }

  {
    // Indicator-plus-square sum: star quasiconvex at the origin but
    // discontinuous, so plainly not quasiconvex.
    Certificate c1({0.0}, 0.0, Orientation::star_quasiconvex, Provenance::claimed());
    Expr h1 = make_scalar_atom([](double t) { return t != 0.0 ? 1.0 : 0.0; },
                               Interval(0, 1), c1, "indicator");
    Certificate c2({0.0}, 2.0, Orientation::star_quasiconvex, Provenance::claimed());
    Expr h2 = make_scalar_atom([](double t) { return t * t; }, Interval(0, 1), c2, "t^2");
    std::vector<Expr> atoms;
    atoms.push_back(std::move(h1));
    atoms.push_back(std::move(h2));
    add("discontinuous_sum",
        sum(std::move(atoms), ProductDomain({BoxDomain({Interval(0, 1)}),
                                             BoxDomain({Interval(0, 1)})})),
        {true, true, true},
        "midpoint of (1,0),(0,1) evaluates to 1.25 above the endpoint max 1");
  }

  add("identity_on_1_3", detail::corpus_identity_atom(1, 3, 1.0), {true, false, true},
      "the strong modulus 2/(b-a) = 1 is tight for the identity");

  {
    // Negative control: the same modulus claimed for ln(t) is false; trusted
    // so the screener lets it through and the checker must catch it.
    Certificate bad({1.0}, 1.0, Orientation::star_quasiconvex, Provenance::claimed());
    add("ln_identity_on_1_3_gamma1",
        make_scalar_atom([](double t) { return std::log(t); }, Interval(1, 3), bad,
                         "ln_t_gamma1", /*trusted=*/true),
        {false, false, true}, "false modulus 1 for ln; witness sits at y=3, lambda=1/2");
  }

  add("ln_identity_on_1_3_derived",
      compose_monotone(ln_transform(), detail::corpus_identity_atom(1, 3, 1.0)),
      {true, false, true}, "composition rule scales the modulus to 1/3, which holds");

  {
    RatioParams rp;
    rp.alphas = {1.0, 0.6};
    rp.betas = {0.7, 0.5, 0.3};
    rp.x_box = {Interval(1, 2), Interval(1, 2)};
    rp.y_box = {Interval(1, 2), Interval(1, 2), Interval(1, 2)};
    add("ratio_multi_risk", ratio_log_expr(rp), {true, true, true},
        "three risk factors; along segments from the all-ones corner the "
        "mixed-sign log terms rise then fall above both endpoint values");
  }

  {
    // Negative control: -(x1^2 + x2^2) claimed star quasiconvex at the
    // origin, which is its maximizer.
    Certificate bad({0.0, 0.0}, 0.0, Orientation::star_quasiconvex, Provenance::claimed());
    auto eval = [](std::span<const double> x) { return -(x[0] * x[0] + x[1] * x[1]); };
    add("neg_sq",
        make_atom(eval, BoxDomain({Interval(-1, 1), Interval(-1, 1)}), bad, "neg_sq",
                  /*trusted=*/true),
        {false, true, false}, "center is the maximizer; every check must fail");
  }

  return out;
}

}  // namespace starqc
