#pragma once

#include <memory>
#include <vector>

#include "fwlab/topology.hpp"

namespace fwlab {

struct LineIntegrals {
  double A = 0.0;        // closed integral of |grad H| dl
  double piPrime = 0.0;  // closed integral of dl / |grad H|
  double B = 0.0;        // closed integral of lap H / |grad H| dl, H coordinate
  // |fine - coarse| from the step-halving rerun
  double err_A = 0.0, err_piPrime = 0.0, err_B = 0.0;
};

// Line integrals over a closed polyline lying on {H = level}. Each segment is
// replaced by a cubic Hermite arc with the exact level tangents at its ends;
// Gauss points are pulled back onto the level before the integrand is taken.
LineIntegrals level_integrals(const StreamFunction& sf, const std::vector<Vec2>& pts, double level);

struct EdgeSample {
  double h = 0.0;
  double a = 0.0, b = 0.0;  // b in the edge coordinate
  double A = 0.0, piPrime = 0.0, B = 0.0;
  double rel_err = 0.0;     // worst relative step-halving estimate
};

EdgeSample edge_coeffs(const FlowTopology& topo, int k, double h, const TraceOptions& opt = {});

struct CoeffNode {
  double h = 0.0;
  double A = 0.0, piPrime = 0.0, B = 0.0;  // B edge-signed, so dA/dh = B
  double a = 0.0, b = 0.0;
  double rel_err = 0.0;
  double uPrime = 0.0, u = 0.0;
};

struct CoefficientOptions {
  TraceOptions trace;
  double h_min = 1e-6;
  int per_decade = 64;
  double log_top = 0.1;  // log nodes stop at log_top * h_range
  int n_linear = 256;
  double fit_lo = 1e-6, fit_hi = 1e-3;
  unsigned threads = 0;
};

class EdgeCoefficients {
 public:
  int k = 0;
  int r = 1;
  double h_range = 0.0;
  std::vector<CoeffNode> nodes;  // increasing h; the last node is the extremum limit
  std::size_t n_log = 0;         // nodes[0 .. n_log) are log-spaced
  double A0 = 0.0;               // linear extrapolation of A to h = 0+
  double A0_slope = 0.0;
  double area_coarea = 0.0;
  double uPrime0 = 0.0;

  // monotone cubic interpolation in the node values; h is clamped to the table
  double a(double h) const;
  double b(double h) const;
  double A(double h) const;
  double piPrime(double h) const;
  double u(double h) const;  // u(0) = 0
  double uPrime(double h) const;

  void build_interpolants();

 private:
  struct Interp;
  std::shared_ptr<const Interp> interp_;
};

EdgeCoefficients tabulate_edge(const FlowTopology& topo, int k, const CoefficientOptions& opt = {});

struct ExitTime {
  double u = 0.0;
  double uPrime0 = 0.0;
};
// A u' = 2 (Area - int_0^h pi'), u(0) = 0
ExitTime mean_exit_time(const EdgeCoefficients& coeffs, double h0);

struct RotationAverage {
  double a = 0.0, b = 0.0;  // b in the edge coordinate
  double T = 0.0;
  double h = 0.0;
  int k = -1;
  double closure = 0.0;
};

struct RotationOptions {
  double rtol = 1e-12;
  double atol = 1e-13;
  double closure_tol = 1e-6;
  double max_time = 1e4;
};

RotationAverage rotation_average_check(const FlowTopology& topo, Vec2 x, const RotationOptions& opt = {});

// integral of |grad H| dl over the separatrix loop itself (the polyline runs
// into the saddle but the integrand stays bounded there)
double boundary_flux(const FlowTopology& topo, int k);

ReebGraph build_graph(const FlowTopology& topo, const std::vector<EdgeCoefficients>& coeffs);

}  // namespace fwlab
