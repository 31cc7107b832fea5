#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "starqc/corpus.hpp"
#include "starqc/json_io.hpp"
#include "starqc/models.hpp"
#include "starqc/verify.hpp"

namespace starqc {

/// Everything a subcommand needs: the expression source (file path or inline
/// JSON), verification budgets, seed, and output path.
struct RunConfig {
  std::string config;
  std::uint64_t seed{0};
  std::size_t points{2000};
  std::size_t lambdas{21};
  std::size_t rays{16};
  std::size_t grid{33};
  std::vector<double> deltas;
  std::string out;
};

namespace cli {

inline Expr load_from_config(const RunConfig& cfg) {
  if (cfg.config.empty()) throw ParseError("config: --config is required");
  if (cfg.config.front() == '{') return load_expression(cfg.config);
  std::ifstream in(cfg.config);
  if (!in) throw ParseError("config: cannot read '" + cfg.config + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_expression(ss.str());
}

inline void emit(const nlohmann::json& doc, const RunConfig& cfg, std::ostream& out) {
  std::string text = doc.dump(2);
  out << text << "\n";
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out);
    if (!f) throw std::runtime_error("cannot write '" + cfg.out + "'");
    f << text << "\n";
  }
}

/// Derive the certificate, print it with the rule chain and the star-check
/// report. Exit 0 iff the check passes.
inline int cmd_certify(const RunConfig& cfg, std::ostream& out = std::cout) {
  Expr e = load_from_config(cfg);
  StarCheckOptions opt;
  opt.n_points = cfg.points;
  opt.n_lambdas = cfg.lambdas;
  opt.seed = cfg.seed;
  VerificationReport r = check_star_inequality(e, opt);

  nlohmann::json doc;
  doc["schema"] = 1;
  doc["command"] = "certify";
  nlohmann::json jc = certificate_to_json(*e.certificate());
  jc["rules"] = e.describe_rules();
  doc["certificate"] = jc;
  doc["report"] = report_to_json(r);
  emit(doc, cfg, out);
  return r.passed ? 0 : 1;
}

/// Hunt for a violation of the named property. Exit 0 when a witness is
/// found, 1 when the budget is exhausted without one.
inline int cmd_falsify(const RunConfig& cfg, const std::string& property,
                       std::ostream& out = std::cout) {
  Expr e = load_from_config(cfg);
  VerificationReport r;
  if (property == "quasiconvex") {
    FalsifyOptions opt;
    opt.n_points = cfg.points;
    opt.n_lambdas = cfg.lambdas;
    opt.seed = cfg.seed;
    r = falsify_quasiconvex(e, opt);
  } else if (property == "minimizer") {
    FalsifyOptions opt;
    opt.n_points = cfg.points;
    opt.seed = cfg.seed;
    r = falsify_minimizer(e, opt);
  } else if (property == "star") {
    StarCheckOptions opt;
    opt.n_points = cfg.points;
    opt.n_lambdas = cfg.lambdas;
    opt.seed = cfg.seed;
    r = check_star_inequality(e, opt);
  } else {
    throw ParseError("falsify: unknown property '" + property + "'");
  }

  nlohmann::json doc;
  doc["schema"] = 1;
  doc["command"] = "falsify";
  doc["property"] = property;
  doc["witness_found"] = r.witness.has_value();
  doc["report"] = report_to_json(r);
  emit(doc, cfg, out);
  return r.witness.has_value() ? 0 : 1;
}

/// Evaluation grid plus per-delta sublevel membership, as CSV files next to
/// the --out base path. 2-D expressions only.
inline int cmd_plot(const RunConfig& cfg, std::ostream& out = std::cout) {
  Expr e = load_from_config(cfg);
  if (e.dimension() != 2)
    throw std::invalid_argument("plot: expression must be 2-dimensional");
  if (cfg.out.empty()) throw ParseError("plot: --out is required");
  if (cfg.grid < 2) throw ParseError("plot: --grid must be at least 2");

  const Interval ax = e.box().axis(0), ay = e.box().axis(1);
  auto coord = [](const Interval& iv, std::size_t i, std::size_t g) {
    return iv.lo + iv.width() * static_cast<double>(i) / static_cast<double>(g - 1);
  };

  std::string grid_path = cfg.out + "_grid.csv";
  {
    std::ofstream f(grid_path);
    if (!f) throw std::runtime_error("cannot write '" + grid_path + "'");
    f << "x1,x2,h\n";
    for (std::size_t i = 0; i < cfg.grid; ++i)
      for (std::size_t j = 0; j < cfg.grid; ++j) {
        double x1 = coord(ax, i, cfg.grid), x2 = coord(ay, j, cfg.grid);
        f << format_double(x1) << ',' << format_double(x2) << ','
          << format_double(e.evaluate(Point{x1, x2})) << "\n";
      }
  }

  nlohmann::json files = nlohmann::json::array();
  files.push_back(grid_path);
  for (double delta : cfg.deltas) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "%g", delta);
    std::string path = cfg.out + "_delta_" + tag + ".csv";
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << "x1,x2\n";
    for (std::size_t i = 0; i < cfg.grid; ++i)
      for (std::size_t j = 0; j < cfg.grid; ++j) {
        double x1 = coord(ax, i, cfg.grid), x2 = coord(ay, j, cfg.grid);
        if (e.evaluate(Point{x1, x2}) <= delta)
          f << format_double(x1) << ',' << format_double(x2) << "\n";
      }
    files.push_back(path);
  }

  nlohmann::json doc;
  doc["schema"] = 1;
  doc["command"] = "plot";
  doc["grid"] = cfg.grid;
  doc["files"] = files;
  emit(doc, cfg, out);
  return 0;
}

inline int demo_prospect(const RunConfig& cfg, std::ostream& out) {
  Expr v = prospect_value(prospect_defaults(2));
  Certificate c = *v.certificate();
  StarCheckOptions sopt;
  sopt.seed = cfg.seed;
  VerificationReport star = check_star_inequality(v, sopt);
  SublevelOptions lopt;
  lopt.deltas = {-4.0, 0.0, 2.0};
  lopt.seed = cfg.seed;
  VerificationReport sub = check_sublevel_star(v, lopt);
  out << "prospect: gamma = " << format_double(c.gamma) << " at ("
      << format_double(c.xbar[0]) << ", " << format_double(c.xbar[1]) << ")\n";
  out << "prospect: star check " << (star.passed ? "passed" : "FAILED") << ", sublevel {-4, 0, 2} "
      << (sub.passed ? "passed" : "FAILED") << "\n";
  return star.passed && sub.passed ? 0 : 1;
}

inline int demo_cfmm(const RunConfig& cfg, std::ostream& out) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> res(10.0, 1000.0);
  std::uniform_real_distribution<double> frac(0.01, 0.5);
  std::size_t ok = 0, total = 0;
  for (double fee : {1.0, 0.997}) {
    for (int trial = 0; trial < 50; ++trial) {
      CfmmState pool = cfmm_geometric_pool({res(rng), res(rng)}, fee);
      std::size_t pay = static_cast<std::size_t>(trial % 2), recv = 1 - pay;
      double amount = frac(rng) * pool.reserves[pay];
      double delta = cfmm_solve_output(pool, pay, amount, recv);
      std::vector<double> x(2, 0.0), y(2, 0.0);
      x[recv] = delta;
      y[pay] = amount;
      ++total;
      if (cfmm_validate_trade(pool, x, y)) ++ok;
    }
  }
  out << "cfmm: " << ok << "/" << total << " solved trades validate\n";
  return ok == total ? 0 : 1;
}

inline int demo_ratio(const RunConfig& cfg, std::ostream& out) {
  RatioParams p;
  p.alphas = {1.0, 0.6};
  p.betas = {0.7, 0.5, 0.3};
  p.x_box = {Interval(1, 2), Interval(1, 2)};
  p.y_box = {Interval(1, 2), Interval(1, 2), Interval(1, 2)};
  Expr L = ratio_log_expr(p);
  Certificate c = *L.certificate();
  StarCheckOptions opt;
  opt.seed = cfg.seed;
  VerificationReport r = check_star_inequality(L, opt);
  out << "ratio: m = 2 benefit and l = 3 risk factors, gamma = " << format_double(c.gamma)
      << ", " << L.describe_rules() << "\n";
  out << "ratio: star check " << (r.passed ? "passed" : "FAILED") << "\n";
  return r.passed ? 0 : 1;
}

inline int demo_corpus(const RunConfig& cfg, std::ostream& out) {
  bool all_ok = true;
  for (const CorpusEntry& entry : builtin_corpus()) {
    StarCheckOptions sopt;
    sopt.seed = cfg.seed;
    FalsifyOptions fopt;
    fopt.seed = cfg.seed;
    bool star = check_star_inequality(entry.expr, sopt).passed;
    bool falsified = falsify_quasiconvex(entry.expr, fopt).witness.has_value();
    bool center = falsify_minimizer(entry.expr, fopt).passed;
    bool ok = star == entry.expected.star_pass &&
              falsified == entry.expected.quasiconvex_falsified &&
              center == entry.expected.minimizer_ok;
    all_ok = all_ok && ok;
    out << "corpus: " << entry.name << " " << (ok ? "ok" : "MISMATCH") << " (star "
        << (star ? "pass" : "fail") << ", quasiconvex " << (falsified ? "falsified" : "held")
        << ", minimizer " << (center ? "ok" : "beaten") << ")\n";
  }
  out << "corpus: " << (all_ok ? "all expected verdicts reproduced" : "MISMATCHES FOUND")
      << "\n";
  return all_ok ? 0 : 1;
}

/// Run a named end-to-end scenario.
inline int cmd_demo(const RunConfig& cfg, const std::string& name,
                    std::ostream& out = std::cout) {
  if (name == "prospect") return demo_prospect(cfg, out);
  if (name == "cfmm") return demo_cfmm(cfg, out);
  if (name == "ratio") return demo_ratio(cfg, out);
  if (name == "corpus") return demo_corpus(cfg, out);
  throw ParseError("demo: unknown name '" + name + "'");
}

}  // namespace cli

/// Entry point behind main(). Exit codes are a stable contract: 0 pass (or
/// witness found for falsify), 1 property failure (or no witness), 2 parse
/// problem, 3 build failure.
inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"star quasiconvexity certificates: derive, verify, falsify, plot"};
  app.fallthrough();
  RunConfig cfg;
  std::string property, demo_name;

  app.add_option("--config", cfg.config, "expression config: file path or inline JSON");
  app.add_option("--seed", cfg.seed, "sampling seed (STARQC_SEED overrides)");
  app.add_option("--points", cfg.points, "sample points per campaign");
  app.add_option("--lambdas", cfg.lambdas, "segment parameters per pair");
  app.add_option("--grid", cfg.grid, "plot grid resolution per axis");
  app.add_option("--deltas", cfg.deltas, "sublevel heights (comma separated)")
      ->delimiter(',');
  app.add_option("--out", cfg.out, "output path (report file or CSV base)");

  CLI::App* certify = app.add_subcommand("certify", "derive and verify the certificate");
  CLI::App* falsify = app.add_subcommand("falsify", "search for a property violation");
  falsify->add_option("property", property, "quasiconvex, minimizer, or star")->required();
  CLI::App* plot = app.add_subcommand("plot", "write grid and sublevel CSVs (2-D only)");
  CLI::App* demo = app.add_subcommand("demo", "prospect, cfmm, ratio, or corpus");
  demo->add_option("name", demo_name, "scenario name")->required();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (const char* env = std::getenv("STARQC_SEED")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (end == env || *end != '\0')
        throw ParseError("STARQC_SEED: not an unsigned integer");
      cfg.seed = static_cast<std::uint64_t>(v);
    }
    if (certify->parsed()) return cli::cmd_certify(cfg);
    if (falsify->parsed()) return cli::cmd_falsify(cfg, property);
    if (plot->parsed()) return cli::cmd_plot(cfg);
    if (demo->parsed()) return cli::cmd_demo(cfg, demo_name);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "build error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace starqc
