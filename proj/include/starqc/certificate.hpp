#pragma once

#include <stdexcept>
#include <string>

#include "starqc/domain.hpp"

namespace starqc {

/// Which one-sided property a certificate asserts. A star-quasiconcave
/// certificate for h is exactly a star-quasiconvex certificate for -h, with
/// xbar a maximizer instead of a minimizer.
enum class Orientation { star_quasiconvex, star_quasiconcave };

inline const char* to_string(Orientation o) {
  return o == Orientation::star_quasiconvex ? "star_quasiconvex" : "star_quasiconcave";
}

/// How a certificate came to be.
///   claimed              - asserted by the caller (screened unless trusted)
///   derived_rule         - produced by a combination rule, exact inputs
///   numerically_screened - produced by a rule but resting on grid-estimated
///                          quantities (ranges, bounds, positivity); such a
///                          certificate is falsification-grade evidence
struct Provenance {
  enum class Kind { claimed, derived_rule, numerically_screened };
  Kind kind{Kind::claimed};
  std::string rule;  // rule name for the derived kinds, empty for claimed

  static Provenance claimed() { return {Kind::claimed, ""}; }
  static Provenance derived(std::string rule_name) {
    return {Kind::derived_rule, std::move(rule_name)};
  }
  static Provenance screened(std::string rule_name) {
    return {Kind::numerically_screened, std::move(rule_name)};
  }

  std::string describe() const {
    switch (kind) {
      case Kind::claimed:
        return "claimed";
      case Kind::derived_rule:
        return "derived_rule(" + rule + ")";
      case Kind::numerically_screened:
        return rule.empty() ? "numerically_screened" : "numerically_screened(" + rule + ")";
    }
    return "";
  }
};

/// Star quasiconvexity certificate: for all lambda in [0,1] and all y in the
/// domain,
///
///   h(lambda*xbar + (1-lambda)*y) <= h(y) - lambda*(1-lambda)*(gamma/2)*||y-xbar||^2
///
/// with the inequality mirrored for the concave orientation. gamma = 0 is the
/// plain star property; gamma > 0 is the strong form.
struct Certificate {
  Point xbar;
  double gamma{0.0};
  Orientation orientation{Orientation::star_quasiconvex};
  Provenance provenance{Provenance::claimed()};

  Certificate() = default;
  Certificate(Point center, double modulus, Orientation o, Provenance prov)
      : xbar(std::move(center)), gamma(modulus), orientation(o), provenance(std::move(prov)) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("Certificate: gamma must be >= 0");
  }
};

}  // namespace starqc
