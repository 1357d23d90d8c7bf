#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fwlab/geometry.hpp"

namespace fwlab {

struct TorusPoint {
  double x1 = 0.0;
  double x2 = 0.0;

  static TorusPoint from_plane(Vec2 p) {
    Vec2 w = wrap_unit(p);
    return {w.x, w.y};
  }
  Vec2 plane() const { return {x1, x2}; }
};

struct FourierTerm {
  int m = 0;
  int n = 0;
  double cos_amp = 0.0;
  double sin_amp = 0.0;
};

struct Hessian {
  double xx = 0, xy = 0, yy = 0;
  double det() const { return xx * yy - xy * xy; }
  double trace() const { return xx + yy; }
  // eigenvalues, ascending
  std::pair<double, double> eigenvalues() const;
  double frobenius() const;
};

struct FieldSample {
  double H = 0.0;
  Vec2 grad;
  Hessian hess;
  double laplacian() const { return hess.xx + hess.yy; }
  Vec2 v() const { return {-grad.y, grad.x}; }
};

// H(x) = a x1 + b x2 + sum c cos 2pi(m x1 + n x2) + s sin 2pi(m x1 + n x2).
// Planar lifts: H is evaluated at the given planar point, so shifting by
// e_1 adds a and shifting by e_2 adds b.
class StreamFunction {
 public:
  StreamFunction(double a, double b, std::vector<FourierTerm> terms);

  double a() const { return a_; }
  double b() const { return b_; }
  double rho() const { return a_ / b_; }
  const std::vector<FourierTerm>& terms() const { return terms_; }

  double H(Vec2 p) const;
  Vec2 grad(Vec2 p) const;
  Vec2 velocity(Vec2 p) const {
    Vec2 g = grad(p);
    return {-g.y, g.x};
  }
  // H and gradient together (one trig evaluation per term)
  double H_grad(Vec2 p, Vec2& g) const;
  FieldSample sample(Vec2 p) const;

  // the H offset picked up by the lift shift (s1, s2)
  double shift_offset(double s1, double s2) const { return a_ * s1 + b_ * s2; }
  // max over the torus of |grad H0|, an a-priori bound from the amplitudes
  double grad_bound() const;

  std::string to_json() const;

 private:
  double a_, b_;
  std::vector<FourierTerm> terms_;
};

StreamFunction cfg_a(double C = 0.25);
// "CFG-A" is the only named built-in
StreamFunction builtin_stream_function(std::string_view name);
// {"builtin": "CFG-A", "C": 0.25} or {"a":..,"b":..,"terms":[[m,n,cos,sin],..]}
StreamFunction parse_stream_function(std::string_view json_text);

enum class CriticalKind { Max, Min, Saddle };
const char* to_string(CriticalKind k);

struct CriticalPoint {
  TorusPoint location;
  CriticalKind kind = CriticalKind::Saddle;
  double h_value = 0.0;  // H at the fundamental-domain representative
  double hessian_det = 0.0;
  Hessian hessian;
};

struct CriticalPointOptions {
  int seed_grid = 64;
  double newton_tol = 1e-12;
  double merge_tol = 1e-6;
  double degeneracy_tol = 1e-8;
  int max_iter = 200;
};

std::vector<CriticalPoint> find_critical_points(const StreamFunction& sf,
                                                const CriticalPointOptions& opt = {});

}  // namespace fwlab
