#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fwlab/rng.hpp"
#include "fwlab/stats.hpp"
#include "fwlab/topology.hpp"

namespace fwlab {

enum class DriftScheme { RK4, Euler };
enum class Clock { Slow, Fast };

struct SimConfig {
  double epsilon = 0.005;
  double alpha = 0.3;
  double dt = 0.0;  // slow-clock step; 0 picks dt_max
  std::int64_t n_paths = 2000;
  std::uint64_t seed = 1;
  int burn_in = 50;
  // multiplies the level ladder eps^alpha and eps^(1/2); 1 is the literal choice
  double level_scale = 1.0;
  double max_leg_time = 1e5;  // slow clock, per stopping-time leg
  DriftScheme drift = DriftScheme::RK4;
  Clock clock = Clock::Slow;
  unsigned threads = 0;

  double dt_max() const;
  double step_dt() const { return dt > 0 ? dt : dt_max(); }
  double gamma_bar() const;     // level_scale * eps^alpha
  double gamma_half() const;    // level_scale * eps^(1/2)
  void validate() const;
};

struct PathState {
  Vec2 x;  // plane lift
  double H = 0.0;
  Vec2 grad;
  double t = 0.0;  // on the configured clock
  std::uint64_t step = 0;
  Vec2 torus() const { return wrap_unit(x); }
};

// One step: deterministic flow increment plus sqrt(eps dt) Gaussian kick.
// The flow increment is classical RK4 by default; DriftScheme::Euler gives
// plain Euler-Maruyama.
class Integrator {
 public:
  Integrator(const StreamFunction& sf, const SimConfig& cfg);
  PathState make_state(Vec2 x) const;
  void step(PathState& s, const PhiloxStream& rng) const;
  // reset the lift to the unit square (keeps the torus point)
  void rewrap(PathState& s) const;
  double dt_clock() const { return dt_clock_; }
  // convert a duration on the configured clock to the fast clock of the
  // original equation
  double to_fast(double t) const { return fast_ ? t : eps_ * t; }
  const StreamFunction& sf() const { return sf_; }

 private:
  const StreamFunction& sf_;
  double eps_, h_, sigma_, dt_clock_;
  bool rk4_, fast_;
};

// counter values at and above this are reserved for initial-condition draws
constexpr std::uint64_t kAuxCounter = std::uint64_t(1) << 63;

struct HitResult {
  double time = 0.0;  // fast clock
  bool hit_target = true;
};

// run until the edge-k coordinate (taken in the lift frame containing the
// start) crosses h_target or h_stop
HitResult hit_level(const FlowTopology& topo, const Integrator& integ, PathState& s, const PhiloxStream& rng,
                    int k, double h_target, double h_stop, double max_time);

struct Statistic {
  std::string name;
  double epsilon = 0.0;
  double alpha = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
};

struct RunReport {
  std::vector<Statistic> rows;
};

// uniform-arclength point on a closed polyline
Vec2 point_on_polyline(const std::vector<Vec2>& poly, double u);

struct ExitTimeResult {
  MeanSE exit_time;  // fast clock
  std::vector<double> samples;
};
// start uniformly (in arclength) on gamma(h0) of edge k, stop at the separatrix
ExitTimeResult exit_time_mc(const FlowTopology& topo, const SimConfig& cfg, int k, double h0);

struct ExcursionResult {
  double level = 0.0;
  MeanSE sigma, tau, ratio;  // fast clock; ratio = E tau / E sigma
  std::int64_t cycles = 0;
};
// weights: initial edge choice on gamma-bar (the gluing weights p_k)
ExcursionResult excursion_chain(const FlowTopology& topo, const SimConfig& cfg, const std::vector<double>& weights,
                                std::int64_t cycles_per_chain);

struct OccupationResult {
  double collar_level = 0.0;
  MeanSE ergodic;
  std::vector<MeanSE> component;  // including the collar
  MeanSE collar;
};
// n_paths stationary (uniform) starts sharing T_slow total slow time
OccupationResult occupation_fraction(const FlowTopology& topo, const SimConfig& cfg, double T_slow);

struct ErgodicExitResult {
  double level = 0.0;
  MeanSE tau_bar;  // fast clock
  MeanSE scaled;   // tau_bar / eps^0.4
  std::vector<double> samples;
};
ErgodicExitResult ergodic_exit_scan(const FlowTopology& topo, const SimConfig& cfg);

struct VertexHittingResult {
  double h_star = 0.0, horizon = 0.0;
  std::vector<double> hitting;      // fast clock, first time any edge reaches h_star
  std::vector<double> vertex_frac;  // fraction of [0, horizon] spent in E
  MeanSE hit, occupation;
};
// start uniformly in E
VertexHittingResult vertex_hitting(const FlowTopology& topo, const SimConfig& cfg, double h_star,
                                   double horizon_fast);

// sample a uniform point of the closure of E by rejection
Vec2 sample_ergodic_point(const FlowTopology& topo, const PhiloxStream& rng, std::uint64_t& aux);

}  // namespace fwlab
