#include "fwlab/coefficients.hpp"

#include <algorithm>
#include <array>
#include <cmath>
// the 1.74 pchip header calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>

#include "fwlab/errors.hpp"
#include "fwlab/parallel.hpp"

namespace fwlab {

namespace {

struct Sums {
  double A = 0, P = 0, B = 0;
};

// 3-point Gauss-Legendre on [0,1]
constexpr double kGu[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kGw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

Vec2 unit_tangent(const StreamFunction& sf, Vec2 p, Vec2 chord) {
  const Vec2 v = sf.velocity(p);
  const double n = norm(v);
  if (n < 1e-9) return (1.0 / norm(chord)) * chord;  // at a saddle vertex
  return (dot(v, chord) >= 0 ? 1.0 / n : -1.0 / n) * v;
}

Sums integrate(const StreamFunction& sf, const std::vector<Vec2>& pts, double level, std::size_t stride) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < pts.size(); i += stride) idx.push_back(i);
  const std::size_t n = idx.size();
  Sums s;
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 P0 = pts[idx[j]], P1 = pts[idx[(j + 1) % n]];
    const Vec2 chord = P1 - P0;
    const double L = norm(chord);
    if (L == 0.0) continue;
    const Vec2 T0 = unit_tangent(sf, P0, chord), T1 = unit_tangent(sf, P1, chord);
    // tangent length of the circular arc through both ends
    const double th = std::atan2(cross(T0, T1), dot(T0, T1));
    const double m = std::abs(th) > 1e-8 ? L * (0.5 * th) / std::sin(0.5 * th) : L;
    for (int g = 0; g < 3; ++g) {
      const double u = kGu[g], u2 = u * u, u3 = u2 * u;
      const Vec2 c = (2 * u3 - 3 * u2 + 1) * P0 + ((u3 - 2 * u2 + u) * m) * T0 + (-2 * u3 + 3 * u2) * P1 +
                     ((u3 - u2) * m) * T1;
      const Vec2 dc = (6 * u2 - 6 * u) * P0 + ((3 * u2 - 4 * u + 1) * m) * T0 + (-6 * u2 + 6 * u) * P1 +
                      ((3 * u2 - 2 * u) * m) * T1;
      Vec2 gr;
      const double d = sf.H_grad(c, gr) - level;
      Vec2 y = c;
      const Vec2 corr = (d / norm2(gr)) * gr;
      if (norm(corr) < 0.1 * L) y -= corr;
      const FieldSample f = sf.sample(y);
      const double gn = norm(f.grad);
      const double w = kGw[g] * norm(dc);
      s.A += w * gn;
      s.P += w / gn;
      s.B += w * f.laplacian() / gn;
    }
  }
  return s;
}

}  // namespace

LineIntegrals level_integrals(const StreamFunction& sf, const std::vector<Vec2>& pts, double level) {
  if (pts.size() < 4) fail(ErrorKind::PreconditionViolated, "level polyline too short for quadrature");
  const Sums fine = integrate(sf, pts, level, 1);
  const Sums coarse = integrate(sf, pts, level, 2);
  LineIntegrals li;
  li.A = fine.A;
  li.piPrime = fine.P;
  li.B = fine.B;
  li.err_A = std::abs(fine.A - coarse.A);
  li.err_piPrime = std::abs(fine.P - coarse.P);
  li.err_B = std::abs(fine.B - coarse.B);
  return li;
}

EdgeSample edge_coeffs(const FlowTopology& topo, int k, double h, const TraceOptions& opt) {
  const LevelCurve lc = level_curve(topo, k, h, opt);
  const LineIntegrals li = level_integrals(*topo.sf, lc.points, lc.level);
  const int r = topo.components[k].r;
  EdgeSample s;
  s.h = h;
  s.A = li.A;
  s.piPrime = li.piPrime;
  s.B = r * li.B;
  s.a = li.A / (2.0 * li.piPrime);
  s.b = s.B / (2.0 * li.piPrime);
  s.rel_err = std::max({li.err_A / li.A, li.err_piPrime / li.piPrime, li.err_B / std::abs(li.B)});
  return s;
}

struct EdgeCoefficients::Interp {
  using P = boost::math::interpolators::pchip<std::vector<double>>;
  std::unique_ptr<P> a, b, A, piPrime, u, uPrime;
  double lo = 0, hi = 0;
};

void EdgeCoefficients::build_interpolants() {
  auto in = std::make_shared<Interp>();
  auto col = [&](auto get, bool with_zero, double zero_val) {
    std::vector<double> x, y;
    if (with_zero) {
      x.push_back(0.0);
      y.push_back(zero_val);
    }
    for (const auto& n : nodes) {
      x.push_back(n.h);
      y.push_back(get(n));
    }
    return std::make_unique<Interp::P>(std::move(x), std::move(y));
  };
  in->a = col([](const CoeffNode& n) { return n.a; }, false, 0);
  in->b = col([](const CoeffNode& n) { return n.b; }, false, 0);
  in->A = col([](const CoeffNode& n) { return n.A; }, true, A0);
  in->piPrime = col([](const CoeffNode& n) { return n.piPrime; }, false, 0);
  in->u = col([](const CoeffNode& n) { return n.u; }, true, 0.0);
  in->uPrime = col([](const CoeffNode& n) { return n.uPrime; }, true, uPrime0);
  in->lo = nodes.front().h;
  in->hi = nodes.back().h;
  interp_ = std::move(in);
}

double EdgeCoefficients::a(double h) const { return (*interp_->a)(std::clamp(h, interp_->lo, interp_->hi)); }
double EdgeCoefficients::b(double h) const { return (*interp_->b)(std::clamp(h, interp_->lo, interp_->hi)); }
double EdgeCoefficients::A(double h) const { return (*interp_->A)(std::clamp(h, 0.0, interp_->hi)); }
double EdgeCoefficients::piPrime(double h) const {
  return (*interp_->piPrime)(std::clamp(h, interp_->lo, interp_->hi));
}
double EdgeCoefficients::u(double h) const { return (*interp_->u)(std::clamp(h, 0.0, interp_->hi)); }
double EdgeCoefficients::uPrime(double h) const { return (*interp_->uPrime)(std::clamp(h, 0.0, interp_->hi)); }

EdgeCoefficients tabulate_edge(const FlowTopology& topo, int k, const CoefficientOptions& opt) {
  const Component& comp = topo.components.at(k);
  EdgeCoefficients ec;
  ec.k = k;
  ec.r = comp.r;
  ec.h_range = comp.h_range;

  std::vector<double> hs;
  const double top = opt.log_top * comp.h_range;
  for (int j = 0;; ++j) {
    const double h = opt.h_min * std::pow(10.0, double(j) / opt.per_decade);
    if (h >= top) break;
    hs.push_back(h);
  }
  ec.n_log = hs.size();
  const double dlin = (comp.h_range - top) / opt.n_linear;
  for (int i = 0; i < opt.n_linear; ++i) hs.push_back(top + i * dlin);

  std::vector<EdgeSample> samp(hs.size());
  parallel_for(hs.size(), opt.threads, [&](std::size_t i) { samp[i] = edge_coeffs(topo, k, hs[i], opt.trace); });

  for (const auto& s : samp) {
    CoeffNode n;
    n.h = s.h;
    n.A = s.A;
    n.piPrime = s.piPrime;
    n.B = s.B;
    n.a = s.a;
    n.b = s.b;
    n.rel_err = s.rel_err;
    ec.nodes.push_back(n);
  }
  // extremum end: the level curves shrink to ellipses around M
  {
    const FieldSample fm = topo.sf->sample(comp.extremum_lift);
    CoeffNode n;
    n.h = comp.h_range;
    n.A = 0.0;
    n.piPrime = 2.0 * std::numbers::pi / std::sqrt(fm.hess.det());
    n.B = comp.r * fm.laplacian() * n.piPrime;
    n.a = 0.0;
    n.b = comp.r * fm.laplacian() / 2.0;
    ec.nodes.push_back(n);
  }

  // A(0+) from a least-squares line over the small-h window
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& n : ec.nodes)
      if (n.h >= opt.fit_lo * (1 - 1e-12) && n.h <= opt.fit_hi * (1 + 1e-12)) {
        sx += n.h, sy += n.A, sxx += n.h * n.h, sxy += n.h * n.A;
        ++m;
      }
    if (m < 2) fail(ErrorKind::PreconditionViolated, "too few nodes in the A(0+) fit window");
    ec.A0_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    ec.A0 = (sy - ec.A0_slope * sx) / m;
  }

  // coarea: pieces of int pi' dh between consecutive nodes
  const std::size_t N = ec.nodes.size();
  std::vector<double> seg(N - 1);
  for (std::size_t j = 0; j + 1 < N; ++j) {
    const CoeffNode &p = ec.nodes[j], &q = ec.nodes[j + 1];
    if (j + 1 < ec.n_log)
      seg[j] = 0.5 * std::log(q.h / p.h) * (p.piPrime * p.h + q.piPrime * q.h);
    else
      seg[j] = 0.5 * (q.h - p.h) * (p.piPrime + q.piPrime);
  }
  double head;
  {
    // pi' ~ alpha + beta ln h below the first node
    const CoeffNode &p = ec.nodes[0], &q = ec.nodes[1];
    const double beta = (q.piPrime - p.piPrime) / std::log(q.h / p.h);
    const double alpha = p.piPrime - beta * std::log(p.h);
    head = p.h * (alpha + beta * (std::log(p.h) - 1.0));
  }
  std::vector<double> tail(N, 0.0);
  for (std::size_t j = N - 1; j-- > 0;) tail[j] = tail[j + 1] + seg[j];
  ec.area_coarea = head + tail[0];
  ec.uPrime0 = 2.0 * ec.area_coarea / ec.A0;

  for (std::size_t i = 0; i + 1 < N; ++i) ec.nodes[i].uPrime = 2.0 * tail[i] / ec.nodes[i].A;
  ec.nodes[N - 1].uPrime = 2.0 / std::abs(ec.nodes[N - 1].b * 2.0);
  ec.nodes[0].u = 0.5 * ec.nodes[0].h * (ec.uPrime0 + ec.nodes[0].uPrime);
  for (std::size_t j = 0; j + 1 < N; ++j) {
    const CoeffNode& p = ec.nodes[j];
    CoeffNode& q = ec.nodes[j + 1];
    if (j + 1 < ec.n_log)
      q.u = p.u + 0.5 * std::log(q.h / p.h) * (p.uPrime * p.h + q.uPrime * q.h);
    else
      q.u = p.u + 0.5 * (q.h - p.h) * (p.uPrime + q.uPrime);
  }
  ec.build_interpolants();
  return ec;
}

ExitTime mean_exit_time(const EdgeCoefficients& coeffs, double h0) {
  if (h0 < 0 || h0 > coeffs.h_range) fail(ErrorKind::PreconditionViolated, "h0 outside the edge");
  return {h0 == 0.0 ? 0.0 : coeffs.u(h0), coeffs.uPrime0};
}

RotationAverage rotation_average_check(const FlowTopology& topo, Vec2 x, const RotationOptions& opt) {
  namespace ode = boost::numeric::odeint;
  const StreamFunction& sf = *topo.sf;
  const Located loc = topo.locate(x);
  if (loc.edge < 0) fail(ErrorKind::PreconditionViolated, "point is not inside a periodic component");
  const Component& comp = topo.components[loc.edge];
  const Vec2 x0 = x + loc.frame_shift;
  const Vec2 v0 = sf.velocity(x0);
  if (norm(v0) < 1e-8) fail(ErrorKind::PreconditionViolated, "fixed point has no rotation");
  const Vec2 t0 = (1.0 / norm(v0)) * v0;

  using State = std::array<double, 4>;
  auto rhs = [&](const State& s, State& d, double) {
    const FieldSample f = sf.sample({s[0], s[1]});
    d[0] = -f.grad.y;
    d[1] = f.grad.x;
    d[2] = norm2(f.grad);
    d[3] = f.laplacian();
  };
  auto stepper = ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<State>());
  stepper.initialize(State{x0.x, x0.y, 0.0, 0.0}, 0.0, 1e-4);
  auto g = [&](const State& s) { return dot(Vec2{s[0], s[1]} - x0, t0); };
  // only crossings of the section close to x0 count as returns
  const double window = 1e-3;
  bool left = false;
  State s_old, s_new;
  for (;;) {
    const auto [ta, tb] = stepper.do_step(rhs);
    s_new = stepper.current_state();
    stepper.calc_state(ta, s_old);
    if (!left && norm(Vec2{s_new[0], s_new[1]} - x0) > 2 * window) left = true;
    if (left && g(s_old) < 0 && g(s_new) >= 0) {
      double lo = ta, hi = tb;
      State mid;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double tm = 0.5 * (lo + hi);
        stepper.calc_state(tm, mid);
        (g(mid) < 0 ? lo : hi) = tm;
      }
      stepper.calc_state(hi, mid);
      const double off = std::abs(dot(Vec2{mid[0], mid[1]} - x0, perp(t0)));
      if (off < window) {
        if (off > opt.closure_tol)
          fail(ErrorKind::PeriodNotClosed, "return misses the section by " + std::to_string(off));
        RotationAverage ra;
        ra.k = loc.edge;
        ra.T = hi;
        ra.a = mid[2] / (2.0 * hi);
        ra.b = comp.r * mid[3] / (2.0 * hi);
        ra.h = comp.r * (sf.H(x0) - comp.h_saddle);
        ra.closure = off;
        return ra;
      }
    }
    if (tb > opt.max_time) fail(ErrorKind::PeriodNotClosed, "no return to the section within max_time");
  }
}

double boundary_flux(const FlowTopology& topo, int k) {
  const Component& c = topo.components.at(k);
  return level_integrals(*topo.sf, c.boundary, c.h_saddle).A;
}

ReebGraph build_graph(const FlowTopology& topo, const std::vector<EdgeCoefficients>& coeffs) {
  if (coeffs.size() != topo.components.size())
    fail(ErrorKind::PreconditionViolated, "one coefficient table per component is required");
  ReebGraph g;
  for (const auto& c : topo.components) {
    g.edges.push_back({c.k, c.h_range, c.r});
    g.p.push_back(std::abs(coeffs[c.k].A0));
  }
  g.ergodic_area = topo.ergodic_area;
  g.kappa = 2.0 * topo.ergodic_area;
  return g;
}

}  // namespace fwlab
