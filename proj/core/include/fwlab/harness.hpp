#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fwlab/sde.hpp"

namespace fwlab {

struct ExperimentConfig {
  std::string field = R"({"builtin": "CFG-A"})";  // JSON text of the stream function
  std::vector<double> epsilons{0.02, 0.01, 0.005};
  double alpha = 0.3;
  std::uint64_t seed = 20240611;
  unsigned threads = 0;
  std::string out = "out";
  std::vector<std::string> suites;

  struct Sde {
    double dt = 0.0;
    DriftScheme drift = DriftScheme::RK4;
    double max_leg_time = 1e5;
    int burn_in = 50;
    double level_scale = 1.0;
  } sde;
  struct ExitTime {
    std::int64_t n_paths = 2000;
    double h0_frac = 0.5;
    int edge = 0;
  } exit_time;
  struct Excursion {
    std::int64_t chains = 16;
    std::int64_t cycles = 150;
    std::vector<double> info_level_scales{0.25};
  } excursion;
  struct Occupation {
    double epsilon = 0.01;
    double T_slow = 1e5;
    std::int64_t n_paths = 100;
  } occupation;
  struct ErgodicExit {
    std::int64_t n_paths = 1000;
    std::vector<double> info_level_scales{0.5};
  } ergodic_exit;
  struct VertexHitting {
    std::int64_t n_paths = 1000;
    double h_star_frac = 0.25;
    double horizon = 0.05;  // fast clock
  } vertex_hitting;
  struct Graph {
    double delta = 1e-3;
    double holding_times = 1e6;
    int pieces = 16;
    std::string far_end = "reflecting";
  } graph;
  struct Coefficients {
    int rotation_points = 10;
  } coefficients;
  struct Dioph {
    std::vector<std::string> rhos{"golden", "sqrt2m1"};
    int terms = 200;
    std::int64_t q_max = 100000;
    std::vector<double> hitting_eps{1e-4, 1e-6, 1e-8};
    int hitting_points = 10000;
    int m_lo = 3, m_hi = 8;
  } dioph;

  // everything that can change a reported number, as sorted JSON
  std::string canonical_json() const;
  std::uint64_t hash() const;
};

// JSON with // and /* */ comments; unknown keys and bad values -> ConfigInvalid
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

const std::vector<std::string>& known_suites();

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

struct RunSummary {
  std::vector<std::string> files;
  std::vector<std::string> skipped;  // "suite@eps: reason"
};

// runs the requested suites in dependency order and writes reports to cfg.out
RunSummary run(const ExperimentConfig& cfg);

// file-level comparison of the SDE vertex-hitting report with the chain report
void compare_reports(const std::string& dir);

struct Tolerances {
  std::map<std::string, double> values;
  Tolerances();
  double operator[](const std::string& k) const;
  // "name=value"; unknown names -> ConfigInvalid
  void set(const std::string& assignment);
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CriterionResult> verify(const std::string& dir, const Tolerances& tol = {});
std::string format_table(const std::vector<CriterionResult>& rows);

// minimal SVG line plot; each series is (label, xs, ys)
struct Series {
  std::string label;
  std::vector<double> x, y;
};
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool logx = false);

}  // namespace fwlab
