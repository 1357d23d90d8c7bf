#include "fwlab/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "fwlab/errors.hpp"
#include "fwlab/parallel.hpp"

namespace fwlab {

namespace mp = boost::multiprecision;

namespace {

BigInt pow10(int k) { return mp::pow(BigInt(10), static_cast<unsigned>(k)); }

Rational frac_floor(const Rational& x) {
  BigInt n = mp::numerator(x), d = mp::denominator(x);
  BigInt f = n / d;
  if (n < 0 && f * d != n) f -= 1;
  return Rational(f);
}

BigInt ifloor(const Rational& x) { return mp::numerator(frac_floor(x)); }

}  // namespace

double RationalInterval::mid() const { return static_cast<double>((lo + hi) / 2); }

RationalInterval exact_rational(const Rational& r) { return {r, r}; }

RationalInterval quadratic_surd(unsigned n, long add, long div, int digits) {
  const BigInt scale = pow10(digits);
  const BigInt s = mp::sqrt(BigInt(n) * scale * scale);  // floor(sqrt(n) 10^d)
  Rational lo(s, scale), hi(s + 1, scale);
  lo = (lo + add) / div;
  hi = (hi + add) / div;
  if (div < 0) std::swap(lo, hi);
  return {lo, hi};
}

RationalInterval golden_interval(int digits) { return quadratic_surd(5, -1, 2, digits); }
RationalInterval sqrt2m1_interval(int digits) { return quadratic_surd(2, -1, 1, digits); }

RationalInterval liouville_interval(int kmax) {
  Rational s(0);
  unsigned long fact = 1;
  for (int k = 1; k <= kmax; ++k) {
    fact *= k;
    s += Rational(BigInt(1), pow10(static_cast<int>(fact)));
  }
  fact *= (kmax + 1);
  // the tail is below twice its first term
  return {s, s + Rational(BigInt(2), pow10(static_cast<int>(fact)))};
}

RationalInterval decimal_interval(const std::string& dec) {
  const auto dot = dec.find('.');
  if (dot == std::string::npos || dec.substr(0, dot).find_first_not_of("0") != std::string::npos)
    fail(ErrorKind::ConfigInvalid, "decimal rho must look like 0.xxxx: " + dec);
  const std::string digits = dec.substr(dot + 1);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    fail(ErrorKind::ConfigInvalid, "bad decimal rho: " + dec);
  // cpp_int reads a leading 0 as an octal prefix
  const auto nz = digits.find_first_not_of('0');
  const BigInt num(nz == std::string::npos ? std::string("0") : digits.substr(nz));
  const BigInt scale = pow10(static_cast<int>(digits.size()));
  return {Rational(num, scale), Rational(num + 1, scale)};
}

RationalInterval rho_from_name(const std::string& s) {
  if (s == "golden") return golden_interval();
  if (s == "sqrt2m1") return sqrt2m1_interval();
  if (s == "liouville") return liouville_interval(5);
  if (s.rfind("liouville:", 0) == 0) {
    const int k = std::atoi(s.c_str() + 10);
    if (k < 1 || k > 7) fail(ErrorKind::ConfigInvalid, "liouville:K needs 1 <= K <= 7");
    return liouville_interval(k);
  }
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    try {
      const BigInt num(s.substr(0, slash)), den(s.substr(slash + 1));
      if (den == 0) fail(ErrorKind::ConfigInvalid, "zero denominator in " + s);
      return exact_rational(Rational(num, den));
    } catch (const std::runtime_error& e) {
      if (dynamic_cast<const Error*>(&e)) throw;
      fail(ErrorKind::ConfigInvalid, "not a fraction: " + s);
    }
  }
  return decimal_interval(s);
}

ContinuedFraction expand(const RationalInterval& rho, int N) {
  if (!(rho.lo > 0 && rho.hi < 1 && rho.lo <= rho.hi))
    fail(ErrorKind::PreconditionViolated, "rho must lie in (0, 1)");
  ContinuedFraction cf;
  cf.rho = rho.mid();
  cf.p = {BigInt(1), BigInt(0)};
  cf.q = {BigInt(0), BigInt(1)};
  Rational lo = rho.lo, hi = rho.hi;
  for (int n = 1; n <= N; ++n) {
    if (lo == 0 && hi == 0) {
      cf.rational_input = true;
      break;
    }
    if (lo <= 0) {
      cf.precision_exhausted = true;
      break;
    }
    // x -> 1/x - a reverses the order of the endpoints
    const Rational ilo = 1 / hi, ihi = 1 / lo;
    const BigInt a = ifloor(ilo);
    if (ifloor(ihi) != a) {
      cf.precision_exhausted = true;
      break;
    }
    cf.terms.push_back(a);
    const std::size_t k = cf.p.size();
    cf.p.push_back(a * cf.p[k - 1] + cf.p[k - 2]);
    cf.q.push_back(a * cf.q[k - 1] + cf.q[k - 2]);
    lo = ilo - a;
    hi = ihi - a;
  }
  if (!cf.rational_input && static_cast<int>(cf.terms.size()) < N && lo == 0 && hi == 0) cf.rational_input = true;
  return cf;
}

std::vector<std::int64_t> expand_float(double rho, int N) {
  std::vector<std::int64_t> out;
  double x = rho;
  for (int n = 0; n < N && x > 1e-15; ++n) {
    const double y = 1.0 / x;
    const double a = std::floor(y);
    out.push_back(static_cast<std::int64_t>(a));
    x = y - a;
  }
  return out;
}

GrowthCondition check_growth_condition(const ContinuedFraction& cf) {
  if (cf.size() < 20) fail(ErrorKind::PreconditionViolated, "growth condition check needs at least 20 terms");
  GrowthCondition c;
  for (int n = 1; n <= cf.size(); ++n)
    if (cf.terms[n - 1] > BigInt(n) * n) c.violations.push_back(n);
  c.n0 = c.violations.empty() ? 1 : c.violations.back() + 1;
  // finitely many terms: accept when the clean tail covers the second half
  c.holds = c.n0 <= cf.size() / 2;
  return c;
}

IdentityReport check_identities(const ContinuedFraction& cf, const RationalInterval& rho) {
  IdentityReport r;
  const int N = cf.size();
  BigInt f1 = 1, f2 = 1;  // f_n, f_{n+1}
  for (int n = 1; n <= N; ++n) {
    const BigInt& a = cf.terms[n - 1];
    if (cf.qn(n) != a * cf.qn(n - 1) + cf.qn(n - 2) || cf.pn(n) != a * cf.pn(n - 1) + cf.pn(n - 2))
      r.recurrence = false;
    // determinant identity, independent of how p, q were built
    const BigInt det = cf.pn(n) * cf.qn(n - 1) - cf.pn(n - 1) * cf.qn(n);
    if (det != ((n - 1) % 2 == 0 ? 1 : -1)) r.recurrence = false;
    if (cf.qn(n) < f1) r.fibonacci = false;
    const BigInt f3 = f1 + f2;
    f1 = f2;
    f2 = f3;
  }
  // bottom-up evaluation of [a_1..a_n] for the first few n
  for (int n = 1; n <= std::min(N, 40); ++n) {
    Rational x(0);
    for (int j = n; j >= 1; --j) x = 1 / (Rational(cf.terms[j - 1]) + x);
    if (x != Rational(cf.pn(n), cf.qn(n))) r.recurrence = false;
  }
  for (int n = 0; n + 1 <= N; ++n) {
    const Rational c(cf.pn(n), cf.qn(n));
    const Rational up = Rational(BigInt(1), cf.qn(n) * cf.qn(n + 1));
    const Rational down = Rational(BigInt(1), cf.qn(n) * (cf.qn(n) + cf.qn(n + 1)));
    for (const Rational& x : {rho.lo, rho.hi}) {
      const Rational gap = mp::abs(x - c);
      if (gap > up) r.gap_upper = false;
      if (gap < down) r.gap_lower = false;
    }
    const bool below = n % 2 == 0;
    if (below ? !(c < rho.lo) : !(c > rho.hi)) r.alternation = false;
    if (n >= 2) {
      const Rational prev(cf.pn(n - 2), cf.qn(n - 2));
      if (below ? !(prev < c) : !(prev > c)) r.alternation = false;
    }
    ++r.checked;
  }
  return r;
}

namespace {
using u128 = FixedCircle::u128;

u128 to_u128(const BigInt& x) {
  const BigInt mask = (BigInt(1) << 64) - 1;
  const auto lo = static_cast<std::uint64_t>(x & mask);
  const auto hi = static_cast<std::uint64_t>((x >> 64) & mask);
  return (u128(hi) << 64) | lo;
}
}  // namespace

FixedCircle::FixedCircle(const RationalInterval& rho) {
  const Rational m = (rho.lo + rho.hi) / 2;
  step_ = to_u128((mp::numerator(m) << 128) / mp::denominator(m));
}

FixedCircle::FixedCircle(double rho) : step_(from_double(rho)) {}

u128 FixedCircle::from_double(double theta) {
  theta -= std::floor(theta);
  const double hi = std::ldexp(theta, 64);
  const auto h = static_cast<std::uint64_t>(hi);
  const double rest = std::ldexp(hi - double(h), 64);
  return (u128(h) << 64) | static_cast<std::uint64_t>(rest);
}

double FixedCircle::to_double(u128 t) { return std::ldexp(static_cast<double>(t), -128); }

BestApproxScan best_approx_scan(const ContinuedFraction& cf, const RationalInterval& rho, std::int64_t q_max) {
  if (q_max < 2) fail(ErrorKind::PreconditionViolated, "q_max must be >= 2");
  BestApproxScan out;
  const FixedCircle circ(rho);
  u128 best = ~u128(0), t = 0;
  for (std::int64_t q = 1; q <= q_max; ++q) {
    t += circ.step();
    const u128 d = FixedCircle::dist(t);
    if (d < best) {
      best = d;
      out.minimizers.push_back(q);
    }
  }
  for (int n = 0; n <= cf.size(); ++n) {
    if (cf.qn(n) > q_max) break;
    const auto qn = static_cast<std::int64_t>(cf.qn(n));
    if (out.convergents.empty() || out.convergents.back() != qn) out.convergents.push_back(qn);
  }
  const bool covered = cf.size() > 0 && cf.qn(cf.size()) > q_max;
  out.matches = covered && out.minimizers == out.convergents;
  return out;
}

IrrationalityScan irrationality_scan(const RationalInterval& rho, std::int64_t q_max, double delta) {
  IrrationalityScan s;
  s.delta = delta;
  s.q_max = q_max;
  const FixedCircle circ(rho);
  u128 t = 0;
  for (std::int64_t q = 1; q <= q_max; ++q) {
    t += circ.step();
    const double d = FixedCircle::to_double(FixedCircle::dist(t));
    if (d < std::pow(double(q), -1.0 - delta)) {
      ++s.failures;
      s.q0 = q;
    }
  }
  return s;
}

double RotationOrbit::theta(std::int64_t n) const {
  const double x = std::fma(static_cast<double>(n), rho, theta0);
  return x - std::floor(x);
}

double RotationOrbit::d(std::int64_t n) const {
  const double t = theta(n);
  return std::min(t, 1.0 - t);
}

std::int64_t hitting_N(const RotationOrbit& orbit, double epsilon) {
  if (!(epsilon > 0)) fail(ErrorKind::PreconditionViolated, "epsilon must be positive");
  for (std::int64_t n = 0;; ++n)
    if (std::sqrt(double(n) * epsilon) >= orbit.d(n)) return n;
}

double dk_sum(const RotationOrbit& orbit, std::int64_t N) {
  double s = 0.0, c = 0.0;
  for (std::int64_t n = 0; n <= N; ++n) {
    const double d = orbit.d(n);
    if (d == 0.0) fail(ErrorKind::OrbitHitsB, "orbit point " + std::to_string(n) + " sits on B");
    const double x = 1.0 / d;
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

ReturnProfile first_return_profile(const ContinuedFraction& cf, const RationalInterval& rho, int m, int grid) {
  if (m < 0 || m + 1 > cf.size()) fail(ErrorKind::PreconditionViolated, "m beyond the expansion depth");
  ReturnProfile rp;
  rp.m = m;
  rp.q_m = static_cast<std::int64_t>(cf.qn(m));
  rp.q_m1 = static_cast<std::int64_t>(cf.qn(m + 1));
  const FixedCircle circ(rho);
  const u128 jlen = FixedCircle::dist(u128(rp.q_m) * circ.step());
  const u128 brk = FixedCircle::dist(u128(rp.q_m1) * circ.step());
  const bool even = m % 2 == 0;
  rp.J_length = FixedCircle::to_double(jlen);
  rp.breakpoint = FixedCircle::to_double(brk);
  rp.grid_step = rp.J_length / grid;
  // s is the distance from 0 into J, on the side J lies
  auto in_J = [&](u128 t) { return even ? t < jlen : (u128(0) - t) < jlen; };
  const u128 cell = jlen / u128(grid);
  const std::int64_t cap = rp.q_m + rp.q_m1 + 1;
  std::set<std::int64_t> vals;
  double long_max = -1.0, short_min = 2.0;
  for (int i = 0; i < grid; ++i) {
    const u128 s = cell * u128(i) + cell / 2;
    u128 t = even ? s : u128(0) - s;
    std::int64_t n = 1;
    for (; n <= cap; ++n) {
      t += circ.step();
      if (in_J(t)) break;
    }
    vals.insert(n);
    const double sd = FixedCircle::to_double(s);
    if (n == rp.q_m + rp.q_m1) long_max = std::max(long_max, sd);
    if (n == rp.q_m1) short_min = std::min(short_min, sd);
  }
  rp.values.assign(vals.begin(), vals.end());
  rp.two_valued = rp.values == std::vector<std::int64_t>{rp.q_m1, rp.q_m + rp.q_m1};
  rp.observed_break = 0.5 * (long_max + short_min);
  rp.breakpoint_ok = rp.two_valued && long_max < short_min &&
                     std::abs(rp.observed_break - rp.breakpoint) <= rp.grid_step;
  return rp;
}

std::int64_t max_hitting_N(double rho, double epsilon, int points, unsigned threads) {
  std::vector<std::int64_t> n(points);
  parallel_for(points, threads, [&](std::size_t i) {
    n[i] = hitting_N(RotationOrbit{(i + 0.5) / points, rho}, epsilon);
  }, 64);
  return points > 0 ? *std::max_element(n.begin(), n.end()) : 0;
}

}  // namespace fwlab
