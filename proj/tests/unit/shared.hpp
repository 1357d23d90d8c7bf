#pragma once

#include "fwlab/coefficients.hpp"
#include "fwlab/topology.hpp"

namespace testenv {

// CFG-A topology and coefficient tables, built once per process
inline const fwlab::FlowTopology& topo() {
  static const fwlab::FlowTopology t = fwlab::build_topology(fwlab::cfg_a());
  return t;
}

inline const std::vector<fwlab::EdgeCoefficients>& coeffs() {
  static const std::vector<fwlab::EdgeCoefficients> c = [] {
    std::vector<fwlab::EdgeCoefficients> v;
    for (const auto& comp : topo().components) v.push_back(fwlab::tabulate_edge(topo(), comp.k));
    return v;
  }();
  return c;
}

inline const fwlab::ReebGraph& graph() {
  static const fwlab::ReebGraph g = fwlab::build_graph(topo(), coeffs());
  return g;
}

// from tests/oracles/level_oracle.py (closed-form critical points, DOP853 level tracing)
constexpr double kHRange = 0.105256831176509;
constexpr double kAreaU = 0.0952484346;
constexpr double kA0 = 1.226827343;
constexpr double kUPrime0 = 0.1552760217;
constexpr double kUHalf = 0.00747146884511;  // u(h_range / 2)

}  // namespace testenv
