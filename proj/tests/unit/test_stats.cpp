#include <cmath>

#include "doctest.h"
#include "fwlab/parallel.hpp"
#include "fwlab/rng.hpp"
#include "fwlab/stats.hpp"

using namespace fwlab;

TEST_CASE("philox4x32-10 known answers") {
  // Random123 kat_vectors
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Philox4x32{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        Philox4x32{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        Philox4x32{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal draws have the right moments") {
  const PhiloxStream r(42, 7);
  StableSum s1, s2, s4;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = r.normal2(i);
    for (double z : {a, b}) s1.add(z), s2.add(z * z), s4.add(z * z * z * z);
  }
  CHECK(std::abs(s1.value() / (2 * n)) < 0.01);
  CHECK(s2.value() / (2 * n) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(s4.value() / (2 * n) == doctest::Approx(3.0).epsilon(0.03));
  // streams differ by path
  CHECK(PhiloxStream(42, 8).normal2(0).first != r.normal2(0).first);
}

TEST_CASE("mean and standard error") {
  const MeanSE m = mean_se({1, 2, 3, 4});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(m.n == 4);
  const MeanSE r = ratio_of_means({2, 4, 6}, {1, 2, 3});
  CHECK(r.mean == doctest::Approx(2.0));
  CHECK(r.stderr_ == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("compensated sum") {
  StableSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
}

TEST_CASE("kolmogorov-smirnov distances") {
  CHECK(ks_two_sample({1, 2, 3}, {1.5, 2.5, 3.5}) == doctest::Approx(1.0 / 3.0));
  CHECK(ks_two_sample({1, 2}, {5, 6}) == doctest::Approx(1.0));
  // uniform cdf, sample at the quarter points
  const double d = ks_one_sample({0.25, 0.5, 0.75}, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(d == doctest::Approx(0.25));
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; }, 7);
  for (int h : hit) CHECK(h == 1);
}
