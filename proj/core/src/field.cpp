#include "fwlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fwlab/errors.hpp"
#include "json.hpp"

namespace fwlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::pair<double, double> Hessian::eigenvalues() const {
  const double m = 0.5 * (xx + yy);
  const double r = std::hypot(0.5 * (xx - yy), xy);
  return {m - r, m + r};
}

double Hessian::frobenius() const { return std::sqrt(xx * xx + 2 * xy * xy + yy * yy); }

StreamFunction::StreamFunction(double a, double b, std::vector<FourierTerm> terms)
    : a_(a), b_(b), terms_(std::move(terms)) {
  if (!(a > 0.0 && a < b))
    fail(ErrorKind::ConfigInvalid, "stream function needs 0 < a < b");
  std::erase_if(terms_, [](const FourierTerm& t) {
    return (t.m == 0 && t.n == 0) || (t.cos_amp == 0.0 && t.sin_amp == 0.0);
  });
}

double StreamFunction::H(Vec2 p) const {
  double h = a_ * p.x + b_ * p.y;
  for (const auto& t : terms_) {
    const double th = kTwoPi * (t.m * p.x + t.n * p.y);
    h += t.cos_amp * std::cos(th) + t.sin_amp * std::sin(th);
  }
  return h;
}

Vec2 StreamFunction::grad(Vec2 p) const {
  Vec2 g{a_, b_};
  for (const auto& t : terms_) {
    const double th = kTwoPi * (t.m * p.x + t.n * p.y);
    const double s = std::sin(th), c = std::cos(th);
    const double d = kTwoPi * (t.sin_amp * c - t.cos_amp * s);
    g.x += t.m * d;
    g.y += t.n * d;
  }
  return g;
}

double StreamFunction::H_grad(Vec2 p, Vec2& g) const {
  double h = a_ * p.x + b_ * p.y;
  g = {a_, b_};
  for (const auto& t : terms_) {
    const double th = kTwoPi * (t.m * p.x + t.n * p.y);
    const double s = std::sin(th), c = std::cos(th);
    h += t.cos_amp * c + t.sin_amp * s;
    const double d = kTwoPi * (t.sin_amp * c - t.cos_amp * s);
    g.x += t.m * d;
    g.y += t.n * d;
  }
  return h;
}

FieldSample StreamFunction::sample(Vec2 p) const {
  FieldSample f;
  f.H = a_ * p.x + b_ * p.y;
  f.grad = {a_, b_};
  for (const auto& t : terms_) {
    const double th = kTwoPi * (t.m * p.x + t.n * p.y);
    const double s = std::sin(th), c = std::cos(th);
    const double val = t.cos_amp * c + t.sin_amp * s;
    f.H += val;
    const double d = kTwoPi * (t.sin_amp * c - t.cos_amp * s);
    f.grad.x += t.m * d;
    f.grad.y += t.n * d;
    const double k2 = -kTwoPi * kTwoPi * val;
    f.hess.xx += t.m * t.m * k2;
    f.hess.xy += t.m * t.n * k2;
    f.hess.yy += t.n * t.n * k2;
  }
  return f;
}

double StreamFunction::grad_bound() const {
  double s = 0.0;
  for (const auto& t : terms_)
    s += kTwoPi * std::hypot(t.cos_amp, t.sin_amp) * std::hypot(double(t.m), double(t.n));
  return std::hypot(a_, b_) + s;
}

std::string StreamFunction::to_json() const {
  nlohmann::ordered_json j;
  j["a"] = a_;
  j["b"] = b_;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& t : terms_) arr.push_back({t.m, t.n, t.cos_amp, t.sin_amp});
  j["terms"] = arr;
  return j.dump();
}

StreamFunction cfg_a(double C) {
  const double a = (std::sqrt(5.0) - 1.0) / 2.0;
  // C sin 2pi x1 + C cos 2pi x2
  return StreamFunction(a, 1.0, {{1, 0, 0.0, C}, {0, 1, C, 0.0}});
}

StreamFunction builtin_stream_function(std::string_view name) {
  if (name == "CFG-A") return cfg_a();
  fail(ErrorKind::ConfigInvalid, "unknown built-in stream function '" + std::string(name) + "'");
}

StreamFunction parse_stream_function(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ConfigInvalid, std::string("stream function json: ") + e.what());
  }
  try {
    if (j.contains("builtin")) {
      const auto name = j.at("builtin").get<std::string>();
      if (name == "CFG-A" && j.contains("C")) return cfg_a(j.at("C").get<double>());
      return builtin_stream_function(name);
    }
    std::vector<FourierTerm> terms;
    for (const auto& t : j.at("terms")) {
      if (!t.is_array() || t.size() != 4)
        fail(ErrorKind::ConfigInvalid, "each term is [m, n, cos_amp, sin_amp]");
      terms.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>(), t[3].get<double>()});
    }
    return StreamFunction(j.at("a").get<double>(), j.at("b").get<double>(), std::move(terms));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ConfigInvalid, std::string("stream function json: ") + e.what());
  }
}

const char* to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::Max: return "max";
    case CriticalKind::Min: return "min";
    case CriticalKind::Saddle: return "saddle";
  }
  return "?";
}

std::vector<CriticalPoint> find_critical_points(const StreamFunction& sf,
                                                const CriticalPointOptions& opt) {
  if (opt.seed_grid < 64) fail(ErrorKind::PreconditionViolated, "seed_grid must be >= 64");
  const int N = opt.seed_grid;
  std::vector<Vec2> roots;

  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      Vec2 x{(i + 0.5) / N, (j + 0.5) / N};
      bool ok = false;
      for (int it = 0; it < opt.max_iter; ++it) {
        const FieldSample f = sf.sample(x);
        if (norm(f.grad) <= opt.newton_tol) {
          ok = true;
          break;
        }
        const double det = f.hess.det();
        if (det == 0.0 || !std::isfinite(det)) break;
        Vec2 step{-(f.hess.yy * f.grad.x - f.hess.xy * f.grad.y) / det,
                  -(-f.hess.xy * f.grad.x + f.hess.xx * f.grad.y) / det};
        const double len = norm(step);
        if (len > 0.05) step *= 0.05 / len;
        x += step;
        // a seed that wanders several cells off is not converging
        if (std::abs(x.x - (i + 0.5) / N) > 0.5 || std::abs(x.y - (j + 0.5) / N) > 0.5) break;
      }
      if (!ok) continue;
      const Vec2 w = wrap_unit(x);
      const bool dup = std::any_of(roots.begin(), roots.end(),
                                   [&](Vec2 r) { return torus_distance(r, w) < opt.merge_tol; });
      if (!dup) roots.push_back(w);
    }
  }

  if (roots.empty()) {
    // grad H vanishing somewhere would show up as a cell where both
    // components change sign
    auto g = [&](int i, int j) { return sf.grad({double(i) / N, double(j) / N}); };
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const Vec2 c[4] = {g(i, j), g(i + 1, j), g(i, j + 1), g(i + 1, j + 1)};
        auto changes = [&](auto comp) {
          double lo = 1e300, hi = -1e300;
          for (auto v : c) {
            lo = std::min(lo, comp(v));
            hi = std::max(hi, comp(v));
          }
          return lo <= 0.0 && hi >= 0.0;
        };
        if (changes([](Vec2 v) { return v.x; }) && changes([](Vec2 v) { return v.y; }))
          fail(ErrorKind::NoConvergence, "Newton failed from every seed but grad H changes sign near (" +
                                             std::to_string(double(i) / N) + ", " +
                                             std::to_string(double(j) / N) + ")");
      }
    return {};
  }

  std::sort(roots.begin(), roots.end(), [](Vec2 p, Vec2 q) { return p.x != q.x ? p.x < q.x : p.y < q.y; });
  std::vector<CriticalPoint> out;
  int extrema = 0, saddles = 0;
  for (Vec2 r : roots) {
    const FieldSample f = sf.sample(r);
    const auto [l1, l2] = f.hess.eigenvalues();
    const double lmin = std::min(std::abs(l1), std::abs(l2));
    if (lmin * lmin < opt.degeneracy_tol)
      fail(ErrorKind::DegenerateCriticalPoint,
           "critical point at (" + std::to_string(r.x) + ", " + std::to_string(r.y) +
               ") has Hessian eigenvalue " + std::to_string(lmin));
    CriticalPoint cp;
    cp.location = {r.x, r.y};
    cp.h_value = f.H;
    cp.hessian = f.hess;
    cp.hessian_det = f.hess.det();
    if (cp.hessian_det < 0) {
      cp.kind = CriticalKind::Saddle;
      ++saddles;
    } else {
      cp.kind = f.hess.trace() < 0 ? CriticalKind::Max : CriticalKind::Min;
      ++extrema;
    }
    out.push_back(cp);
  }
  if (extrema != saddles)
    fail(ErrorKind::NoConvergence, "index sum broken: " + std::to_string(extrema) + " extrema vs " +
                                       std::to_string(saddles) + " saddles (a root was missed)");
  return out;
}

}  // namespace fwlab
