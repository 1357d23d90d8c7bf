#include <cmath>

#include "doctest.h"
#include "fwlab/errors.hpp"
#include "fwlab/sde.hpp"
#include "shared.hpp"

using namespace fwlab;
using testenv::topo;

namespace {
SimConfig base(double eps, std::int64_t n) {
  SimConfig c;
  c.epsilon = eps;
  c.n_paths = n;
  c.seed = 20240611;
  return c;
}
}  // namespace

TEST_CASE("sim config validation") {
  SimConfig c = base(0.01, 10);
  CHECK(c.dt_max() == doctest::Approx(1e-3));
  CHECK(base(1e-6, 1).dt_max() == doctest::Approx(1e-4));
  c.dt = 0.1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = base(0.01, 10);
  c.alpha = 0.6;
  CHECK_THROWS_AS(c.validate(), Error);
  c = base(0.0, 10);
  CHECK_THROWS_AS(c.validate(), Error);  // eps = 0 needs dt
  c.dt = 1e-3;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("zero noise keeps H") {
  SimConfig c = base(0.0, 1);
  c.dt = 1e-3;
  const Integrator in(*topo().sf, c);
  const PhiloxStream rng(1, 0);
  PathState s = in.make_state({0.2, 0.7});
  const double H0 = s.H;
  for (int i = 0; i < 20000; ++i) in.step(s, rng);
  CHECK(std::abs(s.H - H0) < 1e-9);
  // plain Euler drifts off the level
  c.drift = DriftScheme::Euler;
  const Integrator eu(*topo().sf, c);
  PathState e = eu.make_state({0.2, 0.7});
  for (int i = 0; i < 20000; ++i) eu.step(e, rng);
  CHECK(std::abs(e.H - H0) > 1e-4);
}

TEST_CASE("weak check: E H(X_t) - H(x) = eps/2 int lap H along the flow") {
  const StreamFunction& sf = *topo().sf;
  const double eps = 0.01, t = 0.5;
  const Vec2 x0{0.05, 0.55};
  // deterministic path for the right-hand side
  SimConfig det = base(0.0, 1);
  det.dt = 1e-4;
  const Integrator di(sf, det);
  PathState d = di.make_state(x0);
  double lap = 0.0;
  const PhiloxStream r0(1, 0);
  const int nd = static_cast<int>(t / det.dt);
  for (int i = 0; i < nd; ++i) {
    const double l0 = sf.sample(d.x).laplacian();
    di.step(d, r0);
    lap += 0.5 * (l0 + sf.sample(d.x).laplacian()) * det.dt;
  }
  const double expect = 0.5 * eps * lap;

  for (double dt : {1e-3, 2.5e-4}) {
    SimConfig c = base(eps, 1);
    c.dt = dt;
    const Integrator in(sf, c);
    const int n = 3000, steps = static_cast<int>(std::lround(t / dt));
    std::vector<double> dh(n);
    for (int p = 0; p < n; ++p) {
      const PhiloxStream rng(7, p);
      PathState s = in.make_state(x0);
      for (int i = 0; i < steps; ++i) in.step(s, rng);
      dh[p] = s.H - sf.H(x0);
    }
    const MeanSE m = mean_se(dh);
    INFO("dt " << dt << " mean " << m.mean << " se " << m.stderr_ << " expect " << expect);
    CHECK(std::abs(m.mean - expect) < 4 * m.stderr_);
  }
}

TEST_CASE("fast and slow clocks give the same exit times") {
  SimConfig s = base(0.02, 64);
  SimConfig f = s;
  f.clock = Clock::Fast;
  const double h0 = 0.5 * testenv::kHRange;
  const ExitTimeResult a = exit_time_mc(topo(), s, 0, h0), b = exit_time_mc(topo(), f, 0, h0);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == doctest::Approx(b.samples[i]).epsilon(1e-9));
}

TEST_CASE("determinism across thread counts") {
  SimConfig c = base(0.02, 48);
  c.threads = 1;
  const ExitTimeResult a = exit_time_mc(topo(), c, 1, 0.03);
  c.threads = 4;
  const ExitTimeResult b = exit_time_mc(topo(), c, 1, 0.03);
  CHECK(a.samples == b.samples);
  c.seed += 1;
  CHECK(exit_time_mc(topo(), c, 1, 0.03).samples != a.samples);
}

TEST_CASE("exit time Monte Carlo against u(h0)") {
  const ExitTimeResult r = exit_time_mc(topo(), base(0.005, 1000), 0, 0.5 * testenv::kHRange);
  INFO("mean " << r.exit_time.mean << " se " << r.exit_time.stderr_);
  CHECK(std::abs(r.exit_time.mean - testenv::kUHalf) < 4 * r.exit_time.stderr_);
}

TEST_CASE("stderr shrinks like 1/sqrt(n)") {
  // doubling the sample divides the standard error by sqrt 2, not 2
  const double h0 = 0.5 * testenv::kHRange;
  const double s1 = exit_time_mc(topo(), base(0.02, 800), 0, h0).exit_time.stderr_;
  const double s2 = exit_time_mc(topo(), base(0.02, 1600), 0, h0).exit_time.stderr_;
  CHECK(s1 / s2 == doctest::Approx(std::sqrt(2.0)).epsilon(0.15));
}

TEST_CASE("levels above h_range are refused") {
  SimConfig c = base(0.02, 2);
  c.burn_in = 1;
  CHECK_THROWS_AS(excursion_chain(topo(), c, testenv::graph().p, 3), Error);
  CHECK_THROWS_AS(ergodic_exit_scan(topo(), c), Error);
  c.level_scale = 0.25;
  const ExcursionResult r = excursion_chain(topo(), c, testenv::graph().p, 4);
  CHECK(r.level == doctest::Approx(0.25 * std::pow(0.02, 0.3)));
  CHECK(r.sigma.mean > 0);
  CHECK(r.tau.mean > 0);
}

TEST_CASE("occupation fractions add up") {
  SimConfig c = base(0.01, 8);
  const OccupationResult o = occupation_fraction(topo(), c, 16.0);
  double tot = o.ergodic.mean;
  for (const auto& m : o.component) tot += m.mean;
  CHECK(tot == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(o.ergodic.mean > 0.6);
}

TEST_CASE("vertex hitting samples") {
  SimConfig c = base(0.01, 40);
  const VertexHittingResult v = vertex_hitting(topo(), c, 0.25 * testenv::kHRange, 0.05);
  REQUIRE(v.hitting.size() == 40);
  for (double h : v.hitting) CHECK(h > 0);
  for (double f : v.vertex_frac) CHECK((f >= 0 && f <= 1));
}

TEST_CASE("zero noise Euler is explicit Euler") {
  SimConfig c = base(0.0, 1);
  c.dt = 1e-3;
  c.drift = DriftScheme::Euler;
  const Integrator in(*topo().sf, c);
  PathState s = in.make_state({0.3, 0.4});
  const Vec2 v = topo().sf->velocity({0.3, 0.4});
  in.step(s, PhiloxStream(1, 0));
  CHECK(s.x.x == doctest::Approx(0.3 + 1e-3 * v.x).epsilon(1e-15));
  CHECK(s.x.y == doctest::Approx(0.4 + 1e-3 * v.y).epsilon(1e-15));
}

TEST_CASE("one step on a frozen point: E dH = eps dt lap H / 2") {
  const StreamFunction& sf = *topo().sf;
  const Vec2 x0{0.05, 0.55};
  SimConfig c = base(0.01, 1);
  c.dt = 1e-3;
  const Integrator in(sf, c);
  const PhiloxStream rng(77, 0);
  std::vector<double> dh(1000000);
  const PathState s0 = in.make_state(x0);
  for (std::size_t i = 0; i < dh.size(); ++i) {
    PathState s = s0;
    s.step = 2 * i;  // fresh counter per draw
    in.step(s, rng);
    dh[i] = s.H - s0.H;
  }
  const MeanSE m = mean_se(dh);
  const double expect = 0.5 * c.epsilon * c.dt * sf.sample(x0).laplacian();
  INFO("mean " << m.mean << " se " << m.stderr_ << " expect " << expect);
  CHECK(std::abs(m.mean - expect) < 3 * m.stderr_);
}

TEST_CASE("bit-identical paths for the same stream") {
  SimConfig c = base(0.01, 1);
  const Integrator in(*topo().sf, c);
  PathState a = in.make_state({0.1, 0.1}), b = a;
  const PhiloxStream r(9, 4);
  for (int i = 0; i < 500; ++i) in.step(a, r), in.step(b, r);
  CHECK(a.x.x == b.x.x);
  CHECK(a.x.y == b.x.y);
}

TEST_CASE("hit_level: starting on the target and running into it") {
  const FlowTopology& t = topo();
  SimConfig c = base(0.01, 1);
  const Integrator in(*t.sf, c);
  const PhiloxStream rng(5, 0);
  const double h0 = 0.5 * testenv::kHRange;
  PathState s = in.make_state(level_seed(t, 0, h0));
  HitResult r = hit_level(t, in, s, rng, 0, h0, 0.0, 10.0);
  CHECK(r.time < 1e-12);  // the seed sits on the level up to rounding
  CHECK(r.hit_target);
  s = in.make_state(level_seed(t, 0, h0));
  r = hit_level(t, in, s, rng, 0, 0.0, testenv::kHRange * 0.99, 100.0);
  CHECK(r.time > 0);
  s = in.make_state(level_seed(t, 0, h0));
  CHECK_THROWS_AS(hit_level(t, in, s, rng, 0, 0.0, testenv::kHRange * 0.99, 1e-4), Error);
}

TEST_CASE("zero cycles give an empty report") {
  SimConfig c = base(0.01, 2);
  c.level_scale = 0.25;
  c.burn_in = 0;
  const ExcursionResult r = excursion_chain(topo(), c, testenv::graph().p, 0);
  CHECK(r.cycles == 0);
  CHECK(r.sigma.n == 0);
}

TEST_CASE("collar occupation shrinks with eps") {
  // uniform starts are stationary, so the mean is the collar area; grid count of {0 < h <= L}
  const double area[] = {0.14692, 0.123032, 0.10287};
  double prev = 1.0;
  int i = 0;
  for (double eps : {0.02, 0.01, 0.005}) {
    SimConfig c = base(eps, 64);
    c.level_scale = 0.25;
    const OccupationResult o = occupation_fraction(topo(), c, 4000.0);
    CHECK(o.collar.mean < prev);
    CHECK(std::abs(o.collar.mean - area[i++]) < 4 * o.collar.stderr_);
    prev = o.collar.mean;
  }
}
