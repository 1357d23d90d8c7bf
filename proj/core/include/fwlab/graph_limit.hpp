#pragma once

#include <cstdint>
#include <vector>

#include "fwlab/coefficients.hpp"
#include "fwlab/sde.hpp"

namespace fwlab {

enum class DriftSplit { Upwind, Central };

struct ChainEdge {
  int k = 0;
  // node i = 1..M sits at h[i-1]; down from node 1 goes to the vertex,
  // up from node M is zero (reflecting far end)
  std::vector<double> h, up, down;
  std::size_t size() const { return h.size(); }
};

struct StickyChain {
  double delta = 0.0;
  double ergodic_area = 0.0;
  std::vector<double> p;       // gluing weights
  std::vector<double> lambda;  // vertex -> first node of edge k
  std::vector<ChainEdge> edges;

  double vertex_rate() const;
  double vertex_holding() const;  // 2 Area(E) delta / sum p
  std::size_t size() const;       // vertex plus all edge nodes
};

enum class FarEnd { Reflecting, Absorbing };

struct ChainOptions {
  DriftSplit split = DriftSplit::Upwind;
  // > 0 puts a grid node exactly at that level on every edge (spacing stays
  // close to delta on both sides), so first passages of it carry no overshoot
  double knot = 0.0;
  FarEnd far_end = FarEnd::Reflecting;
};

StickyChain build_chain(const ReebGraph& graph, const std::vector<EdgeCoefficients>& coeffs, double delta,
                        const ChainOptions& opt = {});

struct GraphTrajectoryStats {
  double T = 0.0;
  double vertex_frac = 0.0, vertex_se = 0.0;
  std::vector<double> edge_frac, edge_se;
  std::vector<double> hitting;  // vertex -> level h_star, one per regeneration
  std::int64_t jumps = 0;
};

struct ChainSimOptions {
  double h_star = 0.0;  // <= 0 disables hitting samples
  int pieces = 16;      // independent runs sharing T, for stderr and threading
  unsigned threads = 0;
};

GraphTrajectoryStats simulate_chain(const StickyChain& chain, double T, std::uint64_t seed,
                                    const ChainSimOptions& opt = {});

// Sparse matrix on the star graph: vertex 0 plus one path per edge.
struct StarMatrix {
  double d0 = 0.0;
  std::vector<double> row0;  // (0, first node of edge k)
  struct Band {
    std::vector<double> lo, di, up;  // lo[0] couples to the vertex
  };
  std::vector<Band> bands;

  std::size_t size() const;
  StarMatrix transpose() const;
  // I - c * this
  StarMatrix shifted(double c) const;
  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> solve(const std::vector<double>& r) const;
};

// generator of the chain; edges cut below h_cut (nodes with h >= h_cut are
// dropped, so rates into them leak out as absorption)
StarMatrix chain_generator(const StickyChain& chain, double h_cut = 0.0);

// exact mean time from the vertex until some edge reaches h_star
double chain_mean_hitting(const StickyChain& chain, double h_star);
// exact mean time from every node of edge k down to the vertex
std::vector<double> chain_mean_to_vertex(const StickyChain& chain, int k);

struct HittingCdf {
  std::vector<double> t, F;
  double operator()(double x) const;
};
// exact CDF of the same hitting time, TR-BDF2 on the forward equation
HittingCdf chain_hitting_cdf(const StickyChain& chain, double h_star, double t_end, int steps = 4000);
// expected fraction of [0, horizon] spent at the vertex, starting there
double chain_vertex_occupation(const StickyChain& chain, double horizon, int steps = 4000);

// mean vertex -> h_star hitting time of the limiting graph process itself
double graph_vertex_hitting_mean(const ReebGraph& graph, const std::vector<EdgeCoefficients>& coeffs,
                                 double h_star);

struct Comparison {
  double epsilon = 0.0;
  double h_star = 0.0, horizon = 0.0;
  double occupation_sde = 0.0, occupation_se = 0.0, occupation_chain = 0.0, occupation_gap = 0.0;
  double hit_mean_sde = 0.0, hit_mean_chain = 0.0;
  double ks = 0.0;  // SDE hitting sample against the chain CDF
  std::int64_t n = 0;
};

Comparison compare_with_sde(const VertexHittingResult& sde, double epsilon, const StickyChain& chain,
                            double h_star, double horizon);

}  // namespace fwlab
