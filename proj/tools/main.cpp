#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fwlab/diophantine.hpp"
#include "fwlab/errors.hpp"
#include "fwlab/harness.hpp"

using namespace fwlab;

namespace {

struct Globals {
  std::string config, out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
  bool threads_set = false;
};

ExperimentConfig load(const Globals& g) {
  ExperimentConfig cfg = g.config.empty() ? parse_config("{}") : load_config(g.config);
  if (g.seed_set) cfg.seed = g.seed;
  if (g.threads_set) cfg.threads = g.threads;
  if (!g.out.empty()) cfg.out = g.out;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void print_files(const ExperimentConfig& cfg, const RunSummary& s) {
  for (const auto& f : s.files) std::printf("wrote %s/%s\n", cfg.out.c_str(), f.c_str());
  for (const auto& k : s.skipped) std::printf("skipped %s\n", k.c_str());
}

int cmd_cf(const std::string& rho_name, int terms, const std::vector<double>& eps, int points, unsigned threads) {
  const RationalInterval rho = rho_from_name(rho_name);
  const ContinuedFraction cf = expand(rho, terms);
  std::printf("rho = %.17g\ncertified terms: %d%s\n", cf.rho, cf.size(),
              cf.rational_input ? " (rational, expansion terminates)" : cf.precision_exhausted ? " (precision exhausted)" : "");
  std::printf("n,a_n,p_n,q_n\n");
  for (int n = 1; n <= cf.size(); ++n)
    std::printf("%d,%s,%s,%s\n", n, cf.terms[n - 1].str().c_str(), cf.pn(n).str().c_str(), cf.qn(n).str().c_str());
  if (cf.size() >= 20) {
    const GrowthCondition c2 = check_growth_condition(cf);
    std::printf("condition a_n <= n^2: %s for n >= %d", c2.holds ? "holds" : "fails", c2.n0);
    if (!c2.violations.empty()) std::printf(" (%zu violations)", c2.violations.size());
    std::printf("\n");
  } else {
    std::printf("condition a_n <= n^2: too few terms to judge\n");
  }
  std::printf("epsilon,max_N,bound\n");
  for (double e : eps)
    std::printf("%g,%lld,%.6g\n", e, static_cast<long long>(max_hitting_N(cf.rho, e, points, threads)),
                std::pow(e, -1.0 / 3.0 - 0.1));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fwlab: averaging lab for pseudo-periodic flows on the torus"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "experiment config (JSON with comments)");
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { g.seed = s, g.seed_set = true; }, "master seed");
  app.add_option("--out", g.out, "report directory");
  app.add_option_function<unsigned>("--threads", [&](unsigned t) { g.threads = t, g.threads_set = true; },
                                    "worker threads (0 = hardware)");
  app.fallthrough();

  auto* analyze = app.add_subcommand("analyze", "topology report, plus coefficient tables with --coefficients");
  bool with_coeffs = false;
  analyze->add_flag("--coefficients", with_coeffs, "also tabulate the edge coefficients");

  auto* cf = app.add_subcommand("cf", "continued fraction, convergents and hitting-count scan");
  std::string rho = "golden";
  int terms = 60, points = 10000;
  std::vector<double> cf_eps{1e-4, 1e-6, 1e-8};
  cf->add_option("--rho", rho, "golden, sqrt2m1, liouville:K, p/q or a decimal")->capture_default_str();
  cf->add_option("--terms", terms)->capture_default_str();
  cf->add_option("--eps", cf_eps, "epsilons for the hitting-count scan");
  cf->add_option("--points", points, "starting points per scan")->capture_default_str();

  auto* sde = app.add_subcommand("simulate-sde", "Monte Carlo suites on the torus");
  std::vector<std::string> sde_suites;
  sde->add_option("--suite", sde_suites, "exit_time, excursion, occupation, ergodic_exit, vertex_hitting");

  app.add_subcommand("simulate-graph", "sticky-vertex chain on the Reeb graph");

  auto* cmp = app.add_subcommand("compare", "SDE against chain hitting-time report");
  std::string cmp_dir;
  cmp->add_option("--dir", cmp_dir, "report directory (default --out)");

  auto* ver = app.add_subcommand("verify", "check acceptance criteria against a report directory");
  std::string ver_dir;
  std::vector<std::string> tol_over;
  ver->add_option("--dir", ver_dir, "report directory (default --out)");
  ver->add_option("--tol", tol_over, "override a tolerance, name=value");
  bool list_tol = false;
  ver->add_flag("--list-tolerances", list_tol);

  app.add_subcommand("run", "run every suite listed in the config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cf) return cmd_cf(rho, terms, cf_eps, points, g.threads);

    if (*cmp) {
      const std::string dir = !cmp_dir.empty() ? cmp_dir : !g.out.empty() ? g.out : load(g).out;
      compare_reports(dir);
      std::printf("%s", slurp(dir + "/compare.json").c_str());
      return 0;
    }

    if (*ver) {
      Tolerances tol;
      for (const auto& t : tol_over) {
        tol.set(t);
        std::printf("tolerance override %s\n", t.c_str());
      }
      if (list_tol) {
        for (const auto& [k, v] : tol.values) std::printf("%s=%g\n", k.c_str(), v);
        return 0;
      }
      const std::string dir = !ver_dir.empty() ? ver_dir : !g.out.empty() ? g.out : load(g).out;
      const auto rows = verify(dir, tol);
      std::printf("%s", format_table(rows).c_str());
      int failed = 0;
      for (const auto& r : rows) failed += !r.pass;
      std::printf("%d/%zu criteria pass\n", int(rows.size()) - failed, rows.size());
      return failed ? 4 : 0;
    }

    ExperimentConfig cfg = load(g);
    if (*analyze) {
      cfg.suites = {"analyze"};
      if (with_coeffs) cfg.suites.push_back("coefficients");
      const RunSummary s = run(cfg);
      std::printf("%s", slurp(cfg.out + "/topology.json").c_str());
      for (const auto& f : s.files)
        if (f != "topology.json") std::printf("wrote %s/%s\n", cfg.out.c_str(), f.c_str());
      return 0;
    }
    if (*sde) {
      static const std::vector<std::string> all{"exit_time", "excursion", "occupation", "ergodic_exit",
                                                "vertex_hitting"};
      std::vector<std::string> pick;
      if (!sde_suites.empty()) {
        for (const auto& s : sde_suites)
          if (std::find(all.begin(), all.end(), s) == all.end()) fail(ErrorKind::ConfigInvalid, "not an SDE suite: " + s);
        pick = sde_suites;
      } else {
        for (const auto& s : cfg.suites)
          if (std::find(all.begin(), all.end(), s) != all.end()) pick.push_back(s);
        if (pick.empty()) pick = all;
      }
      cfg.suites = pick;
      print_files(cfg, run(cfg));
      return 0;
    }
    if (app.got_subcommand("simulate-graph")) {
      cfg.suites = {"graph"};
      print_files(cfg, run(cfg));
      return 0;
    }
    // run
    print_files(cfg, run(cfg));
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
