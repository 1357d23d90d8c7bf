#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fwlab/errors.hpp"
#include "fwlab/sde.hpp"
#include "shared.hpp"

using namespace fwlab;
using testenv::topo;

TEST_CASE("two cells, one max and one min, symmetric") {
  const FlowTopology& t = topo();
  REQUIRE(t.components.size() == 2);
  int rsum = 0;
  for (const auto& c : t.components) {
    rsum += c.r;
    CHECK(c.h_range == doctest::Approx(testenv::kHRange).epsilon(1e-9));
    CHECK(c.area_polygon == doctest::Approx(testenv::kAreaU).epsilon(1e-4));
    CHECK(c.area_grid == doctest::Approx(testenv::kAreaU).epsilon(1e-3));
    CHECK(c.closure_error < 1e-6);
  }
  CHECK(rsum == 0);
  CHECK(t.ergodic_area == doctest::Approx(1 - 2 * testenv::kAreaU).epsilon(1e-4));
}

TEST_CASE("locate: extrema, ergodic points, lifts") {
  const FlowTopology& t = topo();
  for (const auto& c : t.components) {
    const Located at = t.locate(c.extremum_lift);
    CHECK(at.edge == c.k);
    CHECK(at.h == doctest::Approx(c.h_range).epsilon(1e-9));
    // same torus point, different lift
    const Located far = t.locate(c.extremum_lift + Vec2{3, -2});
    CHECK(far.edge == c.k);
    CHECK(far.h == doctest::Approx(c.h_range).epsilon(1e-9));
  }
  // next to a saddle but on the outside of the loop
  const auto& c0 = t.components[0];
  const Vec2 out = c0.saddle_lift + (c0.saddle_lift - c0.extremum_lift) * 0.2;
  CHECK(t.locate(out).edge == -1);
  CHECK(h_map(t, TorusPoint::from_plane(c0.extremum_lift)).edge == c0.k);
}

TEST_CASE("level curves close and stay on the level") {
  const FlowTopology& t = topo();
  for (double f : {0.01, 0.5, 0.95}) {
    const LevelCurve lc = level_curve(t, 0, f * t.components[0].h_range);
    CHECK(lc.closure_error < 1e-6);
    CHECK(lc.max_level_dev < 1e-8);
    CHECK(std::abs(lc.winding) == 1);
    // area inside shrinks as h grows
    CHECK(std::abs(signed_area(lc.points)) < testenv::kAreaU);
  }
}

TEST_CASE("degenerate critical points are rejected") {
  // b = 2 pi C2 merges the critical points in x2
  const StreamFunction sf(0.5, 1.0, {{1, 0, 0.0, 0.25}, {0, 1, 1.0 / (2 * 3.141592653589793), 0.0}});
  CHECK_THROWS_AS(build_topology(sf), Error);
}

TEST_CASE("separatrix loops close around the extrema") {
  const FlowTopology& t = topo();
  for (const auto& c : t.components) {
    const Separatrix s = trace_separatrices(*t.sf, t.critical, c.saddle_index);
    CHECK(s.has_loop);
    CHECK(s.loop_closure_error < 1e-6);
    for (const auto& b : s.branches) CHECK(b.max_level_dev < 1e-8);
    CHECK(winding_number(s.loop, c.extremum_lift) != 0);
  }
}

TEST_CASE("translation flow: no cells") {
  const FlowTopology t = build_topology(cfg_a(0.05));
  CHECK(t.components.empty());
  CHECK(t.ergodic_area == 1.0);
}

TEST_CASE("level curve limits") {
  const FlowTopology& t = topo();
  const auto& c = t.components[0];
  const double L0 = perimeter(c.boundary);
  CHECK(level_curve(t, 0, 1e-6).length == doctest::Approx(L0).epsilon(0.01));
  const double l1 = level_curve(t, 0, (1 - 1e-2) * c.h_range).length;
  const double l2 = level_curve(t, 0, (1 - 1e-4) * c.h_range).length;
  CHECK(l2 < l1);
  CHECK(l2 < 0.01 * L0);
  CHECK_THROWS_AS(level_curve(t, 0, 1.1 * c.h_range), Error);
}

TEST_CASE("h_map on the segment from saddle to max") {
  const FlowTopology& t = topo();
  const auto& c = t.components[0];
  const Vec2 mid = 0.5 * (c.saddle_lift + c.extremum_lift);
  const GraphPoint g = h_map(t, TorusPoint::from_plane(mid));
  CHECK(g.edge == 0);
  CHECK(g.h == doctest::Approx(c.r * (t.sf->H(mid) - c.h_saddle)).epsilon(1e-12));
  // direct evaluation with the closed-form points: H(mid) - H(saddle)
  CHECK(g.h == doctest::Approx(0.05262841558825471).epsilon(1e-9));
}

TEST_CASE("h_map is constant along the flow inside the cells") {
  const FlowTopology& t = topo();
  SimConfig c;
  c.epsilon = 0.0;
  c.dt = 1e-3;
  const Integrator in(*t.sf, c);
  const PhiloxStream rng(11, 0);
  int tested = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; tested < 1000; ++i) {
    const auto [u1, u2] = rng.uniform2(i);
    const Located l0 = t.locate({u1, u2});
    if (l0.edge < 0 || l0.h < 1e-3) continue;
    PathState s = in.make_state({u1, u2});
    for (int j = 0; j < 100; ++j) in.step(s, rng);
    const Located l1 = t.locate(s.x);
    CHECK(l1.edge == l0.edge);
    worst = std::max(worst, std::abs(l1.h - l0.h));
    ++tested;
  }
  CHECK(worst < 1e-6);
}
