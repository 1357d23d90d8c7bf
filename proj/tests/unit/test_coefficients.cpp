#include <cmath>

#include "doctest.h"
#include "shared.hpp"

using namespace fwlab;
using testenv::coeffs;
using testenv::topo;

namespace {
// level_oracle.py at h = f * h_range on the max edge: A, pi', B
struct Golden {
  double f, A, piPrime, B;
};
constexpr Golden kLevels[] = {
    {0.1, 1.11327906342, 1.08849794374, -10.8108088678},
    {0.5, 0.639913336587, 0.866329022948, -11.6743548923},
    {0.9, 0.131865953483, 0.773515810418, -12.4401390475},
};
}  // namespace

TEST_CASE("level integrals against the ODE oracle") {
  const int k = topo().components[0].r > 0 ? 0 : 1;
  for (const auto& g : kLevels) {
    const EdgeSample s = edge_coeffs(topo(), k, g.f * testenv::kHRange);
    CHECK(s.A == doctest::Approx(g.A).epsilon(1e-7));
    CHECK(s.piPrime == doctest::Approx(g.piPrime).epsilon(1e-7));
    CHECK(s.B == doctest::Approx(g.B).epsilon(1e-6));
    CHECK(s.a == doctest::Approx(g.A / (2 * g.piPrime)).epsilon(1e-7));
    CHECK(s.b == doctest::Approx(g.B / (2 * g.piPrime)).epsilon(1e-6));
  }
}

TEST_CASE("min edge mirrors the max edge") {
  const EdgeSample s0 = edge_coeffs(topo(), 0, 0.3 * testenv::kHRange);
  const EdgeSample s1 = edge_coeffs(topo(), 1, 0.3 * testenv::kHRange);
  CHECK(s0.A == doctest::Approx(s1.A).epsilon(1e-8));
  CHECK(s0.b == doctest::Approx(s1.b).epsilon(1e-7));
}

TEST_CASE("tables: vertex limits and the exit time") {
  for (const EdgeCoefficients& ec : coeffs()) {
    CHECK(ec.A0 == doctest::Approx(testenv::kA0).epsilon(1e-4));
    CHECK(ec.area_coarea == doctest::Approx(testenv::kAreaU).epsilon(1e-5));
    CHECK(ec.uPrime0 == doctest::Approx(testenv::kUPrime0).epsilon(1e-4));
    CHECK(boundary_flux(topo(), ec.k) == doctest::Approx(testenv::kA0).epsilon(1e-4));
    CHECK(mean_exit_time(ec, 0.5 * ec.h_range).u == doctest::Approx(testenv::kUHalf).epsilon(1e-4));
    // u increasing and bounded
    for (std::size_t i = 1; i < ec.nodes.size(); ++i) CHECK(ec.nodes[i].u > ec.nodes[i - 1].u);
    CHECK(std::isfinite(ec.nodes.back().u));
  }
}

TEST_CASE("a ~ 1/|ln h| near the vertex") {
  const EdgeCoefficients& ec = coeffs()[0];
  double lo = INFINITY, hi = 0.0;
  for (double h : {1e-6, 1e-5, 1e-4, 1e-3}) {
    const double v = ec.a(h) * std::abs(std::log(h));
    lo = std::min(lo, v), hi = std::max(hi, v);
  }
  // pi' ~ |ln h| / sqrt|det Hess|, so a |ln h| tends to A0 sqrt|det| / 2
  CHECK(hi / lo < 1.5);
  CHECK(hi < 0.5 * testenv::kA0 * std::sqrt(69.06094157366954));
}

TEST_CASE("rotation average agrees with the quadrature") {
  const Vec2 x = level_seed(topo(), 0, 0.4 * testenv::kHRange);
  const RotationAverage ra = rotation_average_check(topo(), x);
  CHECK(ra.k == 0);
  const EdgeSample es = edge_coeffs(topo(), 0, ra.h);
  CHECK(ra.a == doctest::Approx(es.a).epsilon(1e-7));
  CHECK(ra.b == doctest::Approx(es.b).epsilon(1e-7));
  CHECK(ra.T == doctest::Approx(es.piPrime).epsilon(1e-7));
}

TEST_CASE("graph gluing weights") {
  const ReebGraph& g = testenv::graph();
  REQUIRE(g.p.size() == 2);
  CHECK(g.p[0] == doctest::Approx(testenv::kA0).epsilon(1e-4));
  CHECK(g.kappa == doctest::Approx(2 * topo().ergodic_area));
}

TEST_CASE("near the max: quadratic model and b -> lap H(M) / 2") {
  // Hessian at the max is diagonal, eigenvalues -4 pi^2 C sin 2pi x1*, -4 pi^2 C cos 2pi x2*
  const double l1 = 9.07357026374955, l2 = 7.6112202326332;
  const EdgeCoefficients& ec = coeffs()[0];
  const double s = 1e-4 * ec.h_range;
  const EdgeSample e = edge_coeffs(topo(), 0, ec.h_range - s);
  CHECK(e.a == doctest::Approx(s * (l1 + l2) / 2).epsilon(0.02));
  CHECK(e.b == doctest::Approx(-(l1 + l2) / 2).epsilon(0.01));
  CHECK(ec.b(ec.h_range) == doctest::Approx(-8.342395248191375).epsilon(0.01));
}

TEST_CASE("a is positive and below max |grad H|^2 / 2") {
  const double gmax = topo().sf->grad_bound();
  for (const auto& ec : coeffs())
    for (const auto& n : ec.nodes) {
      CHECK(n.a >= 0);
      CHECK(n.a <= 0.5 * gmax * gmax);
    }
  CHECK(coeffs()[0].u(0.0) == 0.0);
}

TEST_CASE("rotation period grows like |ln h|") {
  std::vector<double> x, y;
  for (double h : {1e-2, 1e-3, 1e-4}) {
    const RotationAverage ra = rotation_average_check(topo(), level_seed(topo(), 0, h));
    x.push_back(std::abs(std::log(h)));
    y.push_back(ra.T);
  }
  const double mx = (x[0] + x[1] + x[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  const double slope = sxy / sxx;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(my + slope * (x[i] - mx) - y[i]) / y[i] < 0.05);
  CHECK(slope > 0);
  // orbits of the extremum itself do not rotate
  CHECK_THROWS(rotation_average_check(topo(), topo().components[0].extremum_lift));
}
