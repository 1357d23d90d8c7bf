#pragma once

// Arclength tracing of a single level set of H: RK4 along +-v/|v| followed by
// a Newton projection back onto the level. Shared by separatrix and level
// curve tracing.

#include <algorithm>
#include <cmath>

#include "fwlab/field.hpp"
#include "fwlab/topology.hpp"

namespace fwlab::detail {

class LevelTracer {
 public:
  LevelTracer(const StreamFunction& sf, double level, double sign, const TraceOptions& opt)
      : sf_(sf), level_(level), sign_(sign), opt_(opt) {}

  Vec2 tangent(Vec2 p) const {
    const Vec2 v = sf_.velocity(p);
    return (sign_ / norm(v)) * v;
  }

  double step_size(Vec2 p) const {
    const FieldSample f = sf_.sample(p);
    const double hn = f.hess.frobenius();
    double ds = opt_.ds_max;
    if (hn > 0) ds = std::min(ds, opt_.step_frac * norm(f.grad) / hn);
    return ds;
  }

  Vec2 rk4(Vec2 p, double ds) const {
    const Vec2 k1 = tangent(p);
    const Vec2 k2 = tangent(p + (0.5 * ds) * k1);
    const Vec2 k3 = tangent(p + (0.5 * ds) * k2);
    const Vec2 k4 = tangent(p + ds * k3);
    return p + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // returns |H - level| after projection
  double project(Vec2& p) const {
    Vec2 g;
    double d = sf_.H_grad(p, g) - level_;
    const double floor = 4e-16 * (1.0 + std::abs(level_));
    for (int it = 0; it < 4 && std::abs(d) > floor; ++it) {
      p -= (d / norm2(g)) * g;
      d = sf_.H_grad(p, g) - level_;
    }
    return std::abs(d);
  }

  double level() const { return level_; }

 private:
  const StreamFunction& sf_;
  double level_;
  double sign_;
  const TraceOptions& opt_;
};

}  // namespace fwlab::detail
