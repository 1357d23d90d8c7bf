#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <vector>

namespace fwlab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// rho is known to lie in [lo, hi]; lo == hi for an exact rational
struct RationalInterval {
  Rational lo, hi;
  double mid() const;
};

RationalInterval exact_rational(const Rational& r);
// (sqrt(n) + add) / div, enclosed to `digits` decimal digits
RationalInterval quadratic_surd(unsigned n, long add, long div, int digits = 60);
RationalInterval golden_interval(int digits = 60);  // (sqrt 5 - 1)/2
RationalInterval sqrt2m1_interval(int digits = 60);
// sum_{k<=kmax} 10^{-k!}, tail enclosed
RationalInterval liouville_interval(int kmax);
// "0.123..." taken as the cell [d, d + 10^-digits]
RationalInterval decimal_interval(const std::string& decimal);
// named constants: "golden", "sqrt2m1", "liouville"; otherwise a decimal
RationalInterval rho_from_name(const std::string& s);

struct ContinuedFraction {
  double rho = 0.0;
  std::vector<BigInt> terms;  // a_1 .. a_N
  // p[n], q[n] for n = -1 .. N stored at index n + 1
  std::vector<BigInt> p, q;
  bool rational_input = false;  // expansion ended with remainder exactly 0
  bool precision_exhausted = false;

  int size() const { return static_cast<int>(terms.size()); }
  const BigInt& qn(int n) const { return q.at(n + 1); }
  const BigInt& pn(int n) const { return p.at(n + 1); }
};

ContinuedFraction expand(const RationalInterval& rho, int N);
// float-driven expansion, only as a cross-check against the exact one
std::vector<std::int64_t> expand_float(double rho, int N);

struct GrowthCondition {
  bool holds = false;
  int n0 = 1;                   // a_n <= n^2 for every certified n >= n0
  std::vector<int> violations;  // 1-based indices with a_n > n^2
};
GrowthCondition check_growth_condition(const ContinuedFraction& cf);

// exact identities over the certified terms; each entry is (name, ok)
struct IdentityReport {
  bool recurrence = true;
  bool fibonacci = true;
  bool gap_upper = true;
  bool gap_lower = true;
  bool alternation = true;
  int checked = 0;
};
IdentityReport check_identities(const ContinuedFraction& cf, const RationalInterval& rho);

// Circle point as a 128-bit fraction of a turn; rotation wraps for free.
class FixedCircle {
 public:
  using u128 = unsigned __int128;
  explicit FixedCircle(const RationalInterval& rho);
  explicit FixedCircle(double rho);
  u128 step() const { return step_; }
  static u128 from_double(double theta);
  static double to_double(u128 t);
  // distance to the nearest integer of t
  static u128 dist(u128 t) { return t > kHalf ? u128(0) - t : t; }
  static constexpr u128 kHalf = u128(1) << 127;

 private:
  u128 step_ = 0;
};

struct BestApproxScan {
  std::vector<std::int64_t> minimizers;    // record-setting q <= q_max
  std::vector<std::int64_t> convergents;   // distinct q_n <= q_max
  bool matches = false;
};
BestApproxScan best_approx_scan(const ContinuedFraction& cf, const RationalInterval& rho, std::int64_t q_max);

struct IrrationalityScan {
  double delta = 0.1;
  std::int64_t q_max = 0;
  std::int64_t q0 = 0;         // bound holds for every q0 < q <= q_max
  std::int64_t failures = 0;
};
IrrationalityScan irrationality_scan(const RationalInterval& rho, std::int64_t q_max, double delta = 0.1);

struct RotationOrbit {
  double theta0 = 0.0;
  double rho = 0.0;
  // theta(Y_n) = theta0 + n rho mod 1, computed per index
  double theta(std::int64_t n) const;
  // d(Y_n, B) with B at circle coordinate 0
  double d(std::int64_t n) const;
};

std::int64_t hitting_N(const RotationOrbit& orbit, double epsilon);
double dk_sum(const RotationOrbit& orbit, std::int64_t N);
// max of hitting_N over starting angles at the midpoints of `points` equal cells
std::int64_t max_hitting_N(double rho, double epsilon, int points, unsigned threads = 0);

struct ReturnProfile {
  int m = 0;
  std::int64_t q_m = 0, q_m1 = 0;
  std::vector<std::int64_t> values;  // distinct return times seen, ascending
  double J_length = 0.0;             // ||q_m rho||
  double breakpoint = 0.0;           // ||q_{m+1} rho||
  double observed_break = 0.0;       // midway between the two classes on the grid
  double grid_step = 0.0;
  bool two_valued = false;
  bool breakpoint_ok = false;
};
ReturnProfile first_return_profile(const ContinuedFraction& cf, const RationalInterval& rho, int m, int grid = 4000);

}  // namespace fwlab
