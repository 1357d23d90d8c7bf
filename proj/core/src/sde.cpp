#include "fwlab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fwlab/errors.hpp"
#include "fwlab/parallel.hpp"

namespace fwlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Membership in the periodic components, using the cached planar H to skip
// polygon tests wherever the edge coordinate is already below thr.
struct Inside {
  int k = -1;
  double h = 0.0;
  Vec2 shift;
};

Inside find_inside(const FlowTopology& topo, Vec2 x, double H, double thr) {
  const StreamFunction& sf = *topo.sf;
  for (const Component& c : topo.components) {
    const BBox& b = c.index->bbox();
    for (double sx = std::ceil(b.xmin - x.x); sx <= std::floor(b.xmax - x.x); sx += 1.0)
      for (double sy = std::ceil(b.ymin - x.y); sy <= std::floor(b.ymax - x.y); sy += 1.0) {
        const double h = c.r * (H + sf.shift_offset(sx, sy) - c.h_saddle);
        if (h < thr) continue;
        if (!c.index->contains({x.x + sx, x.y + sy})) continue;
        return {c.k, h, {sx, sy}};
      }
  }
  return {};
}

double frame_h(const FlowTopology& topo, int k, Vec2 shift, double H) {
  const Component& c = topo.components[k];
  return c.r * (H + topo.sf->shift_offset(shift.x, shift.y) - c.h_saddle);
}

// single-frame band problem: run until the edge-k coordinate leaves (lo, hi)
HitResult run_band(const FlowTopology& topo, const Integrator& integ, PathState& s, const PhiloxStream& rng, int k,
                   Vec2 shift, double lo, double hi, double h_target, double max_time) {
  double hp = frame_h(topo, k, shift, s.H);
  const double t0 = s.t;
  if (hp <= lo || hp >= hi) return {0.0, (hp <= lo ? lo : hi) == h_target};
  for (;;) {
    const double tp = s.t;
    integ.step(s, rng);
    const double hn = frame_h(topo, k, shift, s.H);
    if (hn <= lo || hn >= hi) {
      const double L = hn <= lo ? lo : hi;
      const double th = tp + (s.t - tp) * (hp - L) / (hp - hn);
      return {integ.to_fast(th - t0), L == h_target};
    }
    if (s.t - t0 > max_time) fail(ErrorKind::MaxTimeExceeded, "band leg exceeded " + num(max_time));
    hp = hn;
  }
}

// first time any component's edge coordinate reaches L (inside that component)
double run_any_upper(const FlowTopology& topo, const Integrator& integ, PathState& s, const PhiloxStream& rng,
                     double L, double max_time) {
  if (find_inside(topo, s.x, s.H, L).k >= 0) return 0.0;
  const double t0 = s.t;
  for (;;) {
    const double tp = s.t, Hp = s.H;
    integ.step(s, rng);
    const Inside in = find_inside(topo, s.x, s.H, L);
    if (in.k >= 0) {
      const double hp = frame_h(topo, in.k, in.shift, Hp);
      const double frac = hp < L ? (L - hp) / (in.h - hp) : 0.0;
      return integ.to_fast(tp + (s.t - tp) * frac - t0);
    }
    if (s.t - t0 > max_time) fail(ErrorKind::MaxTimeExceeded, "entry leg exceeded " + num(max_time));
  }
}

void check_level(const FlowTopology& topo, double level, const char* what) {
  for (const Component& c : topo.components)
    if (!(level < c.h_range))
      fail(ErrorKind::PreconditionViolated, std::string(what) + " level " + num(level) + " exceeds h_range " +
                                                num(c.h_range) + " of component " + std::to_string(c.k));
}

}  // namespace

double SimConfig::dt_max() const { return std::min(1e-3, 0.1 * std::sqrt(epsilon)); }
double SimConfig::gamma_bar() const { return level_scale * std::pow(epsilon, alpha); }
double SimConfig::gamma_half() const { return level_scale * std::sqrt(epsilon); }

void SimConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorKind::ConfigInvalid, m); };
  if (!(epsilon >= 0) || !std::isfinite(epsilon)) bad("epsilon must be >= 0");
  if (!(alpha > 0.25 && alpha < 0.5)) bad("alpha must lie in (1/4, 1/2)");
  if (dt < 0) bad("dt must be >= 0");
  if (epsilon == 0 && dt == 0) bad("epsilon = 0 needs an explicit dt");
  if (epsilon > 0 && dt > dt_max() * (1 + 1e-12)) bad("dt " + num(dt) + " above dt_max " + num(dt_max()));
  if (epsilon == 0 && clock == Clock::Fast) bad("fast clock needs epsilon > 0");
  if (n_paths < 0) bad("n_paths must be >= 0");
  if (burn_in < 0) bad("burn_in must be >= 0");
  if (!(level_scale > 0)) bad("level_scale must be > 0");
  if (!(max_leg_time > 0)) bad("max_leg_time must be > 0");
}

Integrator::Integrator(const StreamFunction& sf, const SimConfig& cfg)
    : sf_(sf), eps_(cfg.epsilon), rk4_(cfg.drift == DriftScheme::RK4), fast_(cfg.clock == Clock::Fast) {
  cfg.validate();
  const double dt = cfg.step_dt();
  if (fast_) {
    // the SDE directly: drift v/eps over the fast step eps*dt
    dt_clock_ = eps_ * dt;
    h_ = dt_clock_ / eps_;
    sigma_ = std::sqrt(dt_clock_);
  } else {
    dt_clock_ = dt;
    h_ = dt;
    sigma_ = std::sqrt(eps_ * dt);
  }
}

PathState Integrator::make_state(Vec2 x) const {
  PathState s;
  s.x = x;
  s.H = sf_.H_grad(x, s.grad);
  return s;
}

void Integrator::rewrap(PathState& s) const {
  const Vec2 w = wrap_unit(s.x);
  if (w.x == s.x.x && w.y == s.x.y) return;
  s.x = w;
  s.H = sf_.H_grad(w, s.grad);
}

void Integrator::step(PathState& s, const PhiloxStream& rng) const {
  const auto [z1, z2] = rng.normal2(s.step++);
  const Vec2 x = s.x;
  const Vec2 k1 = perp(s.grad);
  Vec2 d;
  if (rk4_) {
    const Vec2 k2 = sf_.velocity(x + 0.5 * h_ * k1);
    const Vec2 k3 = sf_.velocity(x + 0.5 * h_ * k2);
    const Vec2 k4 = sf_.velocity(x + h_ * k3);
    d = (h_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  } else {
    d = h_ * k1;
  }
  s.x = x + d + Vec2{sigma_ * z1, sigma_ * z2};
  s.H = sf_.H_grad(s.x, s.grad);
  s.t += dt_clock_;
}

HitResult hit_level(const FlowTopology& topo, const Integrator& integ, PathState& s, const PhiloxStream& rng, int k,
                    double h_target, double h_stop, double max_time) {
  if (k < 0 || k >= static_cast<int>(topo.components.size()))
    fail(ErrorKind::PreconditionViolated, "no component " + std::to_string(k));
  integ.rewrap(s);
  // frame: the lift of U_k holding the point, else the one whose extremum is nearest
  const Component& c = topo.components[k];
  const BBox& b = c.index->bbox();
  Vec2 best;
  double best_d = kInf;
  for (double sx = std::ceil(b.xmin - s.x.x) - 1; sx <= std::floor(b.xmax - s.x.x) + 1; sx += 1.0)
    for (double sy = std::ceil(b.ymin - s.x.y) - 1; sy <= std::floor(b.ymax - s.x.y) + 1; sy += 1.0) {
      const Vec2 q{s.x.x + sx, s.x.y + sy};
      const double d = c.index->contains(q) ? -1.0 : norm(q - c.extremum_lift);
      if (d < best_d) best_d = d, best = {sx, sy};
    }
  const double lo = std::min(h_target, h_stop), hi = std::max(h_target, h_stop);
  return run_band(topo, integ, s, rng, k, best, lo, hi, h_target, max_time);
}

Vec2 point_on_polyline(const std::vector<Vec2>& poly, double u) {
  const std::size_t n = poly.size();
  if (n == 0) fail(ErrorKind::PreconditionViolated, "empty polyline");
  const double L = perimeter(poly);
  double target = u * L;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    const double l = norm(b - a);
    if (target <= l && l > 0) return a + (target / l) * (b - a);
    target -= l;
  }
  return poly.back();
}

ExitTimeResult exit_time_mc(const FlowTopology& topo, const SimConfig& cfg, int k, double h0) {
  cfg.validate();
  const Integrator integ(*topo.sf, cfg);
  const LevelCurve lc = level_curve(topo, k, h0);
  ExitTimeResult r;
  r.samples.assign(cfg.n_paths, 0.0);
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    const PhiloxStream rng(cfg.seed, i);
    PathState s = integ.make_state(point_on_polyline(lc.points, rng.uniform2(kAuxCounter).first));
    r.samples[i] = run_band(topo, integ, s, rng, k, {0, 0}, 0.0, kInf, 0.0, cfg.max_leg_time).time;
  });
  r.exit_time = mean_se(r.samples);
  return r;
}

ExcursionResult excursion_chain(const FlowTopology& topo, const SimConfig& cfg, const std::vector<double>& weights,
                                std::int64_t cycles_per_chain) {
  cfg.validate();
  ExcursionResult r;
  r.level = cfg.gamma_bar();
  if (cycles_per_chain <= 0 || cfg.n_paths == 0) return r;
  check_level(topo, r.level, "gamma-bar");
  const std::size_t nc = topo.components.size();
  if (weights.size() != nc) fail(ErrorKind::PreconditionViolated, "one weight per component expected");
  const Integrator integ(*topo.sf, cfg);
  std::vector<LevelCurve> bar(nc);
  for (std::size_t k = 0; k < nc; ++k) bar[k] = level_curve(topo, static_cast<int>(k), r.level);
  double wsum = 0.0;
  for (double w : weights) wsum += w;

  const std::size_t n = cfg.n_paths;
  std::vector<double> sig(n), tau(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const PhiloxStream rng(cfg.seed, i);
    const auto [u1, u2] = rng.uniform2(kAuxCounter);
    std::size_t k = 0;
    for (double acc = weights[0] / wsum; k + 1 < nc && u1 >= acc; acc += weights[k + 1] / wsum) ++k;
    PathState s = integ.make_state(point_on_polyline(bar[k].points, u2));
    StableSum ss, ts;
    for (std::int64_t c = 0; c < cfg.burn_in + cycles_per_chain; ++c) {
      integ.rewrap(s);
      const Inside in = find_inside(topo, s.x, s.H, 0.0);
      if (in.k < 0) fail(ErrorKind::NoConvergence, "chain lost its component after a gamma-bar hit");
      const double sg = run_band(topo, integ, s, rng, in.k, in.shift, 0.0, kInf, 0.0, cfg.max_leg_time).time;
      integ.rewrap(s);
      const double tu = run_any_upper(topo, integ, s, rng, r.level, cfg.max_leg_time);
      if (c >= cfg.burn_in) ss.add(sg), ts.add(tu);
    }
    sig[i] = ss.value() / cycles_per_chain;
    tau[i] = ts.value() / cycles_per_chain;
  });
  r.cycles = static_cast<std::int64_t>(n) * cycles_per_chain;
  r.sigma = mean_se(sig);
  r.tau = mean_se(tau);
  r.ratio = ratio_of_means(tau, sig);
  r.sigma.n = r.tau.n = r.ratio.n = r.cycles;
  return r;
}

OccupationResult occupation_fraction(const FlowTopology& topo, const SimConfig& cfg, double T_slow) {
  cfg.validate();
  if (cfg.clock != Clock::Slow) fail(ErrorKind::ConfigInvalid, "occupation runs on the slow clock");
  const Integrator integ(*topo.sf, cfg);
  OccupationResult r;
  r.collar_level = cfg.gamma_bar();
  const std::size_t n = cfg.n_paths, nc = topo.components.size();
  if (n == 0) return r;
  const std::int64_t steps = std::max<std::int64_t>(1, std::llround(T_slow / n / integ.dt_clock()));
  std::vector<double> fe(n);
  std::vector<std::vector<double>> fu(nc, std::vector<double>(n)), fv = fu;
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const PhiloxStream rng(cfg.seed, i);
    const auto [u1, u2] = rng.uniform2(kAuxCounter);
    PathState s = integ.make_state({u1, u2});
    std::int64_t ce = 0;
    std::vector<std::int64_t> cu(nc, 0), cv(nc, 0);
    for (std::int64_t j = 0; j < steps; ++j) {
      integ.step(s, rng);
      if (std::abs(s.x.x) > 64 || std::abs(s.x.y) > 64) integ.rewrap(s);
      const Inside in = find_inside(topo, s.x, s.H, 0.0);
      if (in.k < 0) {
        ++ce;
      } else {
        ++cu[in.k];
        if (in.h <= r.collar_level) ++cv[in.k];
      }
    }
    fe[i] = double(ce) / steps;
    for (std::size_t k = 0; k < nc; ++k) fu[k][i] = double(cu[k]) / steps, fv[k][i] = double(cv[k]) / steps;
  });
  r.ergodic = mean_se(fe);
  std::vector<double> collar(n, 0.0);
  for (std::size_t k = 0; k < nc; ++k) {
    r.component.push_back(mean_se(fu[k]));
    for (std::size_t i = 0; i < n; ++i) collar[i] += fv[k][i];
  }
  r.collar = mean_se(collar);
  return r;
}

Vec2 sample_ergodic_point(const FlowTopology& topo, const PhiloxStream& rng, std::uint64_t& aux) {
  for (int tries = 0; tries < 100000; ++tries) {
    const auto [u1, u2] = rng.uniform2(aux++);
    if (topo.locate({u1, u2}).edge < 0) return {u1, u2};
  }
  fail(ErrorKind::PreconditionViolated, "ergodic set too small to sample");
}

ErgodicExitResult ergodic_exit_scan(const FlowTopology& topo, const SimConfig& cfg) {
  cfg.validate();
  ErgodicExitResult r;
  r.level = cfg.gamma_half();
  check_level(topo, r.level, "eps^(1/2)");
  const Integrator integ(*topo.sf, cfg);
  r.samples.assign(cfg.n_paths, 0.0);
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    const PhiloxStream rng(cfg.seed, i);
    std::uint64_t aux = kAuxCounter;
    PathState s = integ.make_state(sample_ergodic_point(topo, rng, aux));
    r.samples[i] = run_any_upper(topo, integ, s, rng, r.level, cfg.max_leg_time);
  });
  r.tau_bar = mean_se(r.samples);
  const double sc = std::pow(cfg.epsilon, 0.4);
  r.scaled = {r.tau_bar.mean / sc, r.tau_bar.stderr_ / sc, r.tau_bar.n};
  return r;
}

VertexHittingResult vertex_hitting(const FlowTopology& topo, const SimConfig& cfg, double h_star,
                                   double horizon_fast) {
  cfg.validate();
  check_level(topo, h_star, "h*");
  const Integrator integ(*topo.sf, cfg);
  VertexHittingResult r;
  r.h_star = h_star;
  r.horizon = horizon_fast;
  r.hitting.assign(cfg.n_paths, 0.0);
  r.vertex_frac.assign(cfg.n_paths, 0.0);
  const double dtf = integ.to_fast(integ.dt_clock());
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    const PhiloxStream rng(cfg.seed, i);
    std::uint64_t aux = kAuxCounter;
    PathState s = integ.make_state(sample_ergodic_point(topo, rng, aux));
    double hit = -1.0, tf = 0.0;
    std::int64_t in_e = 0, counted = 0;
    bool in_vertex = true;
    while (hit < 0 || tf < horizon_fast) {
      if (tf < horizon_fast) {
        ++counted;
        if (in_vertex) ++in_e;
      }
      if (std::abs(s.x.x) > 64 || std::abs(s.x.y) > 64) integ.rewrap(s);
      const double Hp = s.H;
      integ.step(s, rng);
      const Inside in = find_inside(topo, s.x, s.H, 0.0);
      in_vertex = in.k < 0;
      if (hit < 0 && in.k >= 0 && in.h >= h_star) {
        const double hp = frame_h(topo, in.k, in.shift, Hp);
        const double frac = hp < h_star ? (h_star - hp) / (in.h - hp) : 1.0;
        hit = tf + dtf * frac;
      }
      tf += dtf;
      if (tf > integ.to_fast(cfg.max_leg_time) && hit < 0)
        fail(ErrorKind::MaxTimeExceeded, "vertex hitting exceeded the time budget");
    }
    r.hitting[i] = hit;
    r.vertex_frac[i] = counted > 0 ? double(in_e) / counted : 0.0;
  });
  r.hit = mean_se(r.hitting);
  r.occupation = mean_se(r.vertex_frac);
  return r;
}

}  // namespace fwlab
