#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fwlab/errors.hpp"
#include "fwlab/graph_limit.hpp"
#include "shared.hpp"

using namespace fwlab;
using testenv::coeffs;
using testenv::graph;

TEST_CASE("vertex rates and holding time") {
  const double delta = 2e-3;
  const StickyChain ch = build_chain(graph(), coeffs(), delta);
  const double ae = graph().ergodic_area, ps = graph().p[0] + graph().p[1];
  CHECK(ch.vertex_holding() == doctest::Approx(2 * ae * delta / ps));
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(ch.lambda[k] == doctest::Approx(graph().p[k] / (2 * ae * delta)));
    // generator on f = edge coordinate at the vertex: lambda_k * delta = p_k / (2 Area(E))
    CHECK(ch.lambda[k] * ch.edges[k].h[0] == doctest::Approx(graph().p[k] / (2 * ae)));
  }
  // interior rates reproduce a f'' + b f' on quadratics
  const ChainEdge& e = ch.edges[0];
  const std::size_t i = e.size() / 2;
  const double hl = e.h[i - 1], h = e.h[i], hr = e.h[i + 1];
  const double drift = e.up[i] * (hr - h) + e.down[i] * (hl - h);
  const double diff = e.up[i] * (hr - h) * (hr - h) + e.down[i] * (hl - h) * (hl - h);
  const double a = coeffs()[0].a(h), b = coeffs()[0].b(h);
  CHECK(drift == doctest::Approx(b).epsilon(1e-6));
  // upwinding adds |b| times the spacing on the side it leans to
  CHECK(diff == doctest::Approx(2 * a + (b > 0 ? b * (hr - h) : -b * (h - hl))).epsilon(1e-6));
}

TEST_CASE("generator rows sum to zero") {
  const StickyChain ch = build_chain(graph(), coeffs(), 5e-3);
  const StarMatrix q = chain_generator(ch);
  std::vector<double> ones(q.size(), 1.0);
  for (double r : q.apply(ones)) CHECK(std::abs(r) < 1e-8 * ch.vertex_rate());
  // solve is the inverse of apply
  const StarMatrix m = q.shifted(0.01);
  std::vector<double> x(q.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.1 * i);
  const auto y = m.solve(m.apply(x));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-9));
  const auto yt = m.transpose().solve(m.transpose().apply(x));
  CHECK(yt[5] == doctest::Approx(x[5]).epsilon(1e-9));
}

TEST_CASE("symmetric edges, stationary occupation") {
  const StickyChain ch = build_chain(graph(), coeffs(), 2e-3);
  const GraphTrajectoryStats st = simulate_chain(ch, 2e5 * ch.vertex_holding(), 99);
  CHECK(st.vertex_frac == doctest::Approx(graph().ergodic_area).epsilon(0.03));
  CHECK(st.edge_frac[0] == doctest::Approx(st.edge_frac[1]).epsilon(0.25));
  CHECK(st.vertex_frac + st.edge_frac[0] + st.edge_frac[1] == doctest::Approx(1.0));
  // a long exact horizon gives the same vertex mass
  CHECK(chain_vertex_occupation(ch, 40.0, 2000) == doctest::Approx(graph().ergodic_area).epsilon(0.02));
}

TEST_CASE("chain is deterministic in its seed") {
  const StickyChain ch = build_chain(graph(), coeffs(), 5e-3);
  ChainSimOptions o;
  o.h_star = 0.02;
  o.threads = 1;
  const auto a = simulate_chain(ch, 1.0, 5, o);
  o.threads = 3;
  const auto b = simulate_chain(ch, 1.0, 5, o);
  CHECK(a.hitting == b.hitting);
  CHECK(a.vertex_frac == b.vertex_frac);
}

TEST_CASE("area(E) -> 0: the vertex is left at once") {
  ReebGraph g = graph();
  g.ergodic_area = 0.0;
  g.kappa = 0.0;
  const StickyChain ch = build_chain(g, coeffs(), 5e-3);
  CHECK(ch.vertex_holding() == 0.0);
  const GraphTrajectoryStats st = simulate_chain(ch, 0.5, 3);
  CHECK(st.vertex_frac == 0.0);
  CHECK(st.edge_frac[0] + st.edge_frac[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(chain_mean_hitting(ch, 0.02), Error);
}

TEST_CASE("hitting mean converges under refinement") {
  const double hs = 0.25 * testenv::kHRange;
  const double limit = graph_vertex_hitting_mean(graph(), coeffs(), hs);
  double prev = INFINITY;
  for (double d : {4e-3, 2e-3, 1e-3, 5e-4}) {
    ChainOptions o;
    o.knot = hs;
    const double m = chain_mean_hitting(build_chain(graph(), coeffs(), d, o), hs);
    const double gap = std::abs(m - limit);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev / limit < 5e-3);
}

TEST_CASE("chain mean time to the vertex tracks u") {
  const StickyChain ch = build_chain(graph(), coeffs(), 1e-3);
  const std::vector<double> m = chain_mean_to_vertex(ch, 0);
  const ChainEdge& e = ch.edges[0];
  std::size_t i = 0;
  while (e.h[i] < 0.5 * testenv::kHRange) ++i;
  CHECK(m[i] == doctest::Approx(coeffs()[0].u(e.h[i])).epsilon(0.03));
}

TEST_CASE("cdf of the hitting time integrates to its mean") {
  ChainOptions o;
  const double hs = 0.02;
  o.knot = hs;
  const StickyChain ch = build_chain(graph(), coeffs(), 2e-3, o);
  const double mean = chain_mean_hitting(ch, hs);
  const HittingCdf F = chain_hitting_cdf(ch, hs, 40 * mean, 4000);
  double s = 0.0;
  for (std::size_t i = 1; i < F.t.size(); ++i) s += (F.t[i] - F.t[i - 1]) * (1 - 0.5 * (F.F[i] + F.F[i - 1]));
  CHECK(s == doctest::Approx(mean).epsilon(2e-3));
  CHECK(F.F.back() > 0.999);
}

TEST_CASE("central split and coarse grids") {
  // near the extremum a ~ |b| (h_range - h), so 2a + b dl stays positive on cfg-a
  ChainOptions o;
  o.split = DriftSplit::Central;
  const StickyChain ch = build_chain(graph(), coeffs(), 0.02, o);
  for (const auto& e : ch.edges)
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e.down[i] > 0);
  CHECK_THROWS_AS(build_chain(graph(), coeffs(), 0.06), Error);
  try {
    build_chain(graph(), coeffs(), 0.06);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RatePositivityViolated);
  }
}

TEST_CASE("absorbing far end") {
  ChainOptions o;
  o.far_end = FarEnd::Absorbing;
  const StickyChain ch = build_chain(graph(), coeffs(), 5e-3, o);
  ChainSimOptions so;
  so.pieces = 4;
  const GraphTrajectoryStats st = simulate_chain(ch, 200.0, 11, so);
  // mass ends up stuck at the extrema
  CHECK(st.vertex_frac < 0.1);
}

TEST_CASE("comparison refuses mismatched observables") {
  const StickyChain ch = build_chain(graph(), coeffs(), 5e-3);
  VertexHittingResult v;
  v.h_star = 0.02;
  v.horizon = 0.05;
  v.hitting = {0.01, 0.02};
  v.vertex_frac = {0.9, 0.8};
  CHECK_THROWS_AS(compare_with_sde(v, 0.01, ch, 0.03, 0.05), Error);
  const Comparison c = compare_with_sde(v, 0.01, ch, 0.02, 0.05);
  CHECK(c.n == 2);
  CHECK(c.ks > 0);
}

TEST_CASE("stationary law of the chain is the area pushforward") {
  // birth-death along each edge: detailed balance gives the invariant vector in closed form
  const StickyChain ch = build_chain(graph(), coeffs(), 1e-3);
  double total = 1.0;
  std::vector<double> mass(ch.edges.size(), 0.0);
  for (std::size_t k = 0; k < ch.edges.size(); ++k) {
    const ChainEdge& e = ch.edges[k];
    double pi = ch.lambda[k] / e.down[0];
    for (std::size_t i = 0;; ++i) {
      mass[k] += pi;
      if (i + 1 == e.size()) break;
      pi *= e.up[i] / e.down[i + 1];
    }
    total += mass[k];
  }
  CHECK(1.0 / total == doctest::Approx(graph().ergodic_area).epsilon(0.05));
  for (double m : mass) CHECK(m / total == doctest::Approx(testenv::kAreaU).epsilon(0.05));
}

TEST_CASE("long run occupations at delta = 1e-3") {
  const StickyChain ch = build_chain(graph(), coeffs(), 1e-3);
  const GraphTrajectoryStats st = simulate_chain(ch, 1e6 * ch.vertex_holding(), 7);
  CHECK(st.vertex_frac == doctest::Approx(graph().ergodic_area).epsilon(0.05));
  for (double f : st.edge_frac) CHECK(f == doctest::Approx(testenv::kAreaU).epsilon(0.05));
}

TEST_CASE("hitting law is stable under halving delta") {
  const double h_star = 0.5 * testenv::kHRange;
  const StickyChain c1 = build_chain(graph(), coeffs(), 2e-3, {DriftSplit::Upwind, h_star});
  const StickyChain c2 = build_chain(graph(), coeffs(), 1e-3, {DriftSplit::Upwind, h_star});
  const double t_end = 20 * chain_mean_hitting(c1, h_star);
  const HittingCdf f1 = chain_hitting_cdf(c1, h_star, t_end), f2 = chain_hitting_cdf(c2, h_star, t_end);
  double ks = 0.0;
  for (int i = 0; i <= 2000; ++i) ks = std::max(ks, std::abs(f1(t_end * i / 2000) - f2(t_end * i / 2000)));
  CHECK(ks < 0.02);
}

TEST_CASE("comparing the chain with its own law") {
  const double h_star = 0.5 * testenv::kHRange, horizon = 0.05;
  const StickyChain ch = build_chain(graph(), coeffs(), 2e-3, {DriftSplit::Upwind, h_star});
  const double mean = chain_mean_hitting(ch, h_star);
  const HittingCdf F = chain_hitting_cdf(ch, h_star, 40 * mean);
  VertexHittingResult v;
  v.h_star = h_star;
  v.horizon = horizon;
  // exact quantiles of the chain CDF stand in for an SDE sample
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    const double q = (i + 0.5) / n;
    double lo = 0, hi = 40 * mean;
    for (int it = 0; it < 80; ++it) (F((lo + hi) / 2) < q ? lo : hi) = (lo + hi) / 2;
    v.hitting.push_back(hi);
  }
  v.hit = mean_se(v.hitting);
  v.occupation.mean = chain_vertex_occupation(ch, horizon);
  const Comparison c = compare_with_sde(v, 0.01, ch, h_star, horizon);
  CHECK(c.occupation_gap == 0.0);
  CHECK(c.ks <= 0.5 / n + 1e-3);
  CHECK(c.hit_mean_sde == doctest::Approx(c.hit_mean_chain).epsilon(0.01));
}
