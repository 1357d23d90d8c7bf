#pragma once

// Philox4x32-10 counter-based generator. A stream is keyed by (seed, path)
// and indexed by a 64-bit step counter, so draws never depend on how paths
// are scheduled across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace fwlab {

using Philox4x32 = std::array<std::uint32_t, 4>;

inline Philox4x32 philox4x32_10(Philox4x32 ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += W0;
      key[1] += W1;
    }
    const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
    ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
           std::uint32_t(p0)};
  }
  return ctr;
}

class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t path)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, path_(path) {}

  // the four words for one counter value
  Philox4x32 block(std::uint64_t counter) const {
    return philox4x32_10({std::uint32_t(counter), std::uint32_t(counter >> 32), std::uint32_t(path_),
                          std::uint32_t(path_ >> 32)},
                         key_);
  }

  // two independent N(0,1) draws from one block (Box-Muller)
  std::pair<double, double> normal2(std::uint64_t counter) const {
    const Philox4x32 w = block(counter);
    const std::uint64_t a = (std::uint64_t(w[0]) << 32) | w[1];
    const std::uint64_t b = (std::uint64_t(w[2]) << 32) | w[3];
    const double u1 = (double(a >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = double(b >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(th), r * std::sin(th)};
  }

  // two uniforms in [0, 1)
  std::pair<double, double> uniform2(std::uint64_t counter) const {
    const Philox4x32 w = block(counter);
    const std::uint64_t a = (std::uint64_t(w[0]) << 32) | w[1];
    const std::uint64_t b = (std::uint64_t(w[2]) << 32) | w[3];
    return {double(a >> 11) * 0x1.0p-53, double(b >> 11) * 0x1.0p-53};
  }

  std::uint64_t path() const { return path_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t path_;
};

}  // namespace fwlab
