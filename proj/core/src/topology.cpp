#include "fwlab/topology.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <map>

#include "fwlab/errors.hpp"
#include "fwlab/parallel.hpp"
#include "level_tracer.hpp"

namespace fwlab {

namespace {

// eigenvector of Dv = J Hess for eigenvalue lam (Dv is traceless)
Vec2 flow_eigenvector(const Hessian& h, double lam) {
  const Vec2 e1{h.yy, -h.xy - lam};
  const Vec2 e2{lam - h.xy, h.xx};
  const Vec2 e = norm2(e1) > norm2(e2) ? e1 : e2;
  return (1.0 / norm(e)) * e;
}

Branch trace_branch(const StreamFunction& sf, const std::vector<CriticalPoint>& critical, Vec2 A,
                    Vec2 dir, bool unstable, double level, const TraceOptions& opt) {
  Branch br;
  br.unstable = unstable;
  detail::LevelTracer tr(sf, level, unstable ? 1.0 : -1.0, opt);
  Vec2 x = A + opt.delta0 * dir;
  double dev = tr.project(x);
  br.points.push_back(x);
  double len = 0.0;
  while (len < opt.max_len) {
    const double ds = tr.step_size(x);
    Vec2 y = tr.rk4(x, ds);
    dev = tr.project(y);
    if (!std::isfinite(y.x) || !std::isfinite(y.y) || dev > opt.trace_tol)
      fail(ErrorKind::TraceDiverged, "separatrix branch left its level (|dH| = " + std::to_string(dev) + ")");
    br.max_level_dev = std::max(br.max_level_dev, dev);
    len += ds;
    br.points.push_back(y);
    x = y;
    if (len < 10.0 * opt.delta0) continue;
    for (std::size_t s = 0; s < critical.size(); ++s) {
      if (critical[s].kind != CriticalKind::Saddle) continue;
      const Vec2 c = critical[s].location.plane();
      const Vec2 d = x - c;
      const Vec2 shift{std::round(d.x), std::round(d.y)};
      if (norm(d - shift) < opt.delta0) {
        br.open = false;
        br.end_saddle = static_cast<int>(s);
        br.end_lift = c + shift;
        return br;
      }
    }
  }
  return br;
}

}  // namespace

Separatrix trace_separatrices(const StreamFunction& sf, const std::vector<CriticalPoint>& critical,
                              int saddle_index, const TraceOptions& opt) {
  if (saddle_index < 0 || saddle_index >= static_cast<int>(critical.size()) ||
      critical[saddle_index].kind != CriticalKind::Saddle)
    fail(ErrorKind::PreconditionViolated, "trace_separatrices needs a saddle");
  Separatrix sep;
  sep.saddle = critical[saddle_index];
  sep.saddle_index = saddle_index;
  sep.lift = sep.saddle.location.plane();
  sep.level = sf.H(sep.lift);
  const Hessian& h = sep.saddle.hessian;
  const double lam = std::sqrt(-h.det());
  sep.unstable_dir = flow_eigenvector(h, lam);
  sep.stable_dir = flow_eigenvector(h, -lam);

  const Vec2 dirs[4] = {sep.unstable_dir, -sep.unstable_dir, sep.stable_dir, -sep.stable_dir};
  for (int i = 0; i < 4; ++i)
    sep.branches[i] = trace_branch(sf, critical, sep.lift, dirs[i], i < 2, sep.level, opt);

  for (int i = 0; i < 2; ++i) {
    const Branch& br = sep.branches[i];
    if (br.open || br.end_saddle != saddle_index || norm(br.end_lift - sep.lift) > 0.5) continue;
    sep.has_loop = true;
    sep.loop.clear();
    sep.loop.push_back(sep.lift);
    sep.loop.insert(sep.loop.end(), br.points.begin(), br.points.end());
    // the loop comes home along the stable direction; measure the miss
    // against that tangent line rather than against the saddle itself
    sep.loop_closure_error = std::abs(cross(br.points.back() - sep.lift, sep.stable_dir));
    if (sep.loop_closure_error > opt.closure_tol)
      fail(ErrorKind::TraceDiverged, "separatrix loop misses the stable tangent by " +
                                         std::to_string(sep.loop_closure_error));
    break;
  }
  return sep;
}

double FlowTopology::edge_coordinate(int k, Vec2 p) const {
  const Component& c = components[k];
  return c.r * (sf->H(p) - c.h_saddle);
}

Located FlowTopology::locate(Vec2 p) const {
  const Vec2 w = wrap_unit(p);
  for (const Component& c : components) {
    const BBox& b = c.index->bbox();
    for (double sx = std::ceil(b.xmin - w.x); sx <= std::floor(b.xmax - w.x); sx += 1.0)
      for (double sy = std::ceil(b.ymin - w.y); sy <= std::floor(b.ymax - w.y); sy += 1.0) {
        const Vec2 q{w.x + sx, w.y + sy};
        if (!c.index->contains(q)) continue;
        const double h = std::max(0.0, c.r * (sf->H(q) - c.h_saddle));
        return {c.k, h, q - p};
      }
  }
  return {};
}

GraphPoint h_map(const FlowTopology& topo, TorusPoint x) {
  const Located l = topo.locate(x.plane());
  if (l.edge < 0) return {};
  return {l.edge, std::min(l.h, topo.components[l.edge].h_range)};
}

FlowTopology build_topology(const StreamFunction& sf_in, const TopologyOptions& opt) {
  FlowTopology topo;
  topo.sf = std::make_shared<const StreamFunction>(sf_in);
  const StreamFunction& sf = *topo.sf;
  topo.critical = find_critical_points(sf, opt.critical);
  topo.grid_n = opt.grid_n;

  std::vector<int> saddles, extrema;
  for (std::size_t i = 0; i < topo.critical.size(); ++i)
    (topo.critical[i].kind == CriticalKind::Saddle ? saddles : extrema).push_back(static_cast<int>(i));

  topo.separatrices.resize(saddles.size());
  parallel_for(saddles.size(), opt.threads, [&](std::size_t i) {
    topo.separatrices[i] = trace_separatrices(sf, topo.critical, saddles[i], opt.trace);
  });

  struct Enclosure {
    int sep;
    Vec2 lift;
  };
  std::vector<std::shared_ptr<const LoopIndex>> loops(topo.separatrices.size());
  for (std::size_t s = 0; s < topo.separatrices.size(); ++s)
    if (topo.separatrices[s].has_loop)
      loops[s] = std::make_shared<const LoopIndex>(topo.separatrices[s].loop);

  std::map<int, int> loop_owner;  // separatrix -> extremum
  for (int e : extrema) {
    const Vec2 m = topo.critical[e].location.plane();
    std::vector<Enclosure> enc;
    for (std::size_t s = 0; s < loops.size(); ++s) {
      if (!loops[s]) continue;
      const BBox& b = loops[s]->bbox();
      for (double sx = std::ceil(b.xmin - m.x); sx <= std::floor(b.xmax - m.x); sx += 1.0)
        for (double sy = std::ceil(b.ymin - m.y); sy <= std::floor(b.ymax - m.y); sy += 1.0)
          if (loops[s]->contains(m + Vec2{sx, sy})) enc.push_back({static_cast<int>(s), m + Vec2{sx, sy}});
    }
    const std::string where = std::to_string(m.x) + ", " + std::to_string(m.y);
    if (enc.empty()) fail(ErrorKind::TopologyAmbiguous, "extremum at (" + where + ") is enclosed by no separatrix loop");
    if (enc.size() > 1)
      fail(ErrorKind::TopologyAmbiguous, "extremum at (" + where + ") is enclosed by " +
                                             std::to_string(enc.size()) + " separatrix loops");
    if (loop_owner.count(enc[0].sep))
      fail(ErrorKind::TopologyAmbiguous, "one separatrix loop encloses two extrema");
    loop_owner[enc[0].sep] = e;

    const Separatrix& sep = topo.separatrices[enc[0].sep];
    Component c;
    c.k = static_cast<int>(topo.components.size());
    c.extremum = topo.critical[e];
    c.extremum_lift = enc[0].lift;
    c.saddle = sep.saddle;
    c.saddle_index = sep.saddle_index;
    c.saddle_lift = sep.lift;
    c.r = c.extremum.kind == CriticalKind::Max ? 1 : -1;
    c.h_saddle = sep.level;
    c.h_range = c.r * (sf.H(c.extremum_lift) - c.h_saddle);
    if (!(c.h_range > 0))
      fail(ErrorKind::TopologyAmbiguous, "extremum at (" + where + ") does not rise above its saddle level");
    c.boundary = sep.loop;
    c.closure_error = sep.loop_closure_error;
    c.area_polygon = std::abs(signed_area(c.boundary));
    c.index = loops[enc[0].sep];
    topo.components.push_back(std::move(c));
  }

  // grid classification, one row per work item
  const int N = opt.grid_n;
  if (N > 0 && !topo.components.empty()) {
    std::vector<std::vector<std::int64_t>> rows(N, std::vector<std::int64_t>(topo.components.size(), 0));
    parallel_for(
        N, opt.threads,
        [&](std::size_t i) {
          for (int j = 0; j < N; ++j) {
            const Located l = topo.locate({(i + 0.5) / N, (j + 0.5) / N});
            if (l.edge >= 0) ++rows[i][l.edge];
          }
        },
        16);
    double covered = 0.0;
    for (auto& c : topo.components) {
      std::int64_t cnt = 0;
      for (const auto& r : rows) cnt += r[c.k];
      c.area_grid = double(cnt) / (double(N) * N);
      covered += c.area_grid;
    }
    topo.ergodic_area = 1.0 - covered;
  } else {
    double covered = 0.0;
    for (auto& c : topo.components) covered += (c.area_grid = c.area_polygon);
    topo.ergodic_area = 1.0 - covered;
  }
  return topo;
}

Vec2 level_seed(const FlowTopology& topo, int k, double h) {
  if (k < 0 || k >= static_cast<int>(topo.components.size()))
    fail(ErrorKind::PreconditionViolated, "no component " + std::to_string(k));
  const Component& c = topo.components[k];
  if (!(h > 0 && h < c.h_range))
    fail(ErrorKind::PreconditionViolated, "level h = " + std::to_string(h) + " outside (0, h_range)");
  const StreamFunction& sf = *topo.sf;
  const Vec2 A = c.saddle_lift, M = c.extremum_lift;
  auto f = [&](double t) { return c.r * (sf.H(A + t * (M - A)) - c.h_saddle) - h; };
  // walk in from the extremum to the first crossing
  const int n = 256;
  double t_hi = 1.0, f_hi = f(1.0);
  for (int j = n - 1; j >= 0; --j) {
    const double t_lo = double(j) / n;
    const double f_lo = f(t_lo);
    if (f_lo < 0.0 && f_hi >= 0.0) {
      boost::uintmax_t iters = 200;
      auto [a, b] = boost::math::tools::toms748_solve(f, t_lo, t_hi, f_lo, f_hi,
                                                      boost::math::tools::eps_tolerance<double>(52), iters);
      const double t = std::abs(f(a)) < std::abs(f(b)) ? a : b;
      const Vec2 s = A + t * (M - A);
      if (!c.index->contains(s)) break;
      return s;
    }
    t_hi = t_lo;
    f_hi = f_lo;
  }
  fail(ErrorKind::SeedNotFound, "no crossing of level h = " + std::to_string(h) + " on the saddle-extremum segment");
}

LevelCurve level_curve(const FlowTopology& topo, int k, double h, const TraceOptions& opt) {
  const Vec2 seed0 = level_seed(topo, k, h);
  const Component& c = topo.components[k];
  const StreamFunction& sf = *topo.sf;
  LevelCurve lc;
  lc.k = k;
  lc.h = h;
  lc.level = c.h_saddle + c.r * h;
  detail::LevelTracer tr(sf, lc.level, 1.0, opt);
  Vec2 s = seed0;
  lc.max_level_dev = tr.project(s);
  const Vec2 ts = tr.tangent(s);
  const double ds0 = tr.step_size(s);

  lc.points.push_back(s);
  Vec2 x = s;
  double len = 0.0;
  bool left = false;
  for (;;) {
    const double ds = tr.step_size(x);
    Vec2 y = tr.rk4(x, ds);
    const double dev = tr.project(y);
    if (!std::isfinite(y.x) || dev > opt.trace_tol)
      fail(ErrorKind::TraceDiverged, "level curve left its level (|dH| = " + std::to_string(dev) + ")");
    lc.max_level_dev = std::max(lc.max_level_dev, dev);
    const double tx = dot(x - s, ts), ty = dot(y - s, ts);
    if (!left && norm(y - s) > 5.0 * ds0) left = true;
    if (left && tx < 0.0 && ty >= 0.0 && std::abs(dot(y - s, perp(ts))) < 2.0 * ds) {
      // land the final step on the seed's transversal; a chord
      // interpolation would report its own sagitta as closure error
      double d0 = 0.0, f0 = tx, d1 = ds, f1 = ty;
      Vec2 hit = y;
      for (int it = 0; it < 6 && std::abs(f1) > 1e-15; ++it) {
        const double d2 = d1 - f1 * (d1 - d0) / (f1 - f0);
        hit = tr.rk4(x, d2);
        tr.project(hit);
        d0 = d1, f0 = f1, d1 = d2, f1 = dot(hit - s, ts);
      }
      lc.closure_error = norm(hit - s);
      if (lc.closure_error > opt.closure_tol)
        fail(ErrorKind::TraceDiverged, "level curve misses its seed by " + std::to_string(lc.closure_error));
      len += norm(s - x);
      break;
    }
    len += norm(y - x);
    lc.points.push_back(y);
    x = y;
    if (len > opt.max_len) fail(ErrorKind::TraceDiverged, "level curve did not close within max_len");
  }
  lc.length = len;
  lc.winding = winding_number(lc.points, c.extremum_lift);
  return lc;
}

}  // namespace fwlab
