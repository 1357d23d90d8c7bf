#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "fwlab/field.hpp"

namespace fwlab {

struct TraceOptions {
  double delta0 = 1e-5;
  double ds_max = 1e-3;
  // local step is also capped at step_frac * |grad H| / |Hess|
  double step_frac = 0.02;
  double trace_tol = 1e-8;
  double closure_tol = 1e-6;
  double max_len = 10.0;
};

struct Branch {
  std::vector<Vec2> points;  // plane lift, starting next to the saddle
  bool unstable = true;      // follows +v (unstable) or -v (stable)
  bool open = true;          // ran to max_len without meeting a saddle
  int end_saddle = -1;       // index into the critical point list
  Vec2 end_lift;             // lift of that saddle the branch ran into
  double max_level_dev = 0.0;
};

struct Separatrix {
  CriticalPoint saddle;
  int saddle_index = -1;
  Vec2 lift;  // the plane lift all branches are traced from
  double level = 0.0;
  Vec2 unstable_dir, stable_dir;
  std::array<Branch, 4> branches;  // unstable +, unstable -, stable +, stable -
  bool has_loop = false;
  std::vector<Vec2> loop;  // closed polyline through the saddle lift
  double loop_closure_error = 0.0;
};

Separatrix trace_separatrices(const StreamFunction& sf, const std::vector<CriticalPoint>& critical,
                              int saddle_index, const TraceOptions& opt = {});

struct Component {
  int k = 0;
  CriticalPoint extremum;
  Vec2 extremum_lift;
  CriticalPoint saddle;
  int saddle_index = -1;
  Vec2 saddle_lift;
  int r = 1;               // +1 around a max, -1 around a min
  double h_saddle = 0.0;   // H at saddle_lift
  double h_range = 0.0;    // r * (H(extremum_lift) - h_saddle)
  std::vector<Vec2> boundary;
  double closure_error = 0.0;
  double area_grid = 0.0;
  double area_polygon = 0.0;
  std::shared_ptr<const LoopIndex> index;
};

struct GraphPoint {
  int edge = -1;  // -1: the vertex (ergodic set or a boundary)
  double h = 0.0;
  bool at_vertex() const { return edge < 0; }
};

// where a planar point sits: which component, its edge coordinate, and the
// integer shift taking the point into the lift frame of that component's loop
struct Located {
  int edge = -1;
  double h = 0.0;
  Vec2 frame_shift;
};

struct TopologyOptions {
  CriticalPointOptions critical;
  TraceOptions trace;
  int grid_n = 2048;
  unsigned threads = 0;
};

struct FlowTopology {
  std::shared_ptr<const StreamFunction> sf;
  std::vector<CriticalPoint> critical;
  std::vector<Separatrix> separatrices;
  std::vector<Component> components;
  double ergodic_area = 1.0;
  int grid_n = 0;

  Located locate(Vec2 p) const;
  // edge coordinate of p measured in component k's frame, no membership test
  double edge_coordinate(int k, Vec2 p_in_frame) const;
};

FlowTopology build_topology(const StreamFunction& sf, const TopologyOptions& opt = {});

GraphPoint h_map(const FlowTopology& topo, TorusPoint x);

struct LevelCurve {
  int k = 0;
  double h = 0.0;
  double level = 0.0;        // plane value of H on the curve, in component k's frame
  std::vector<Vec2> points;  // closed; the last point joins the first
  double length = 0.0;
  double closure_error = 0.0;
  double max_level_dev = 0.0;
  int winding = 0;           // around the extremum lift
};

// point on segment A_k -> M_k where the edge coordinate equals h
Vec2 level_seed(const FlowTopology& topo, int k, double h);
LevelCurve level_curve(const FlowTopology& topo, int k, double h, const TraceOptions& opt = {});

struct ReebGraph {
  struct Edge {
    int k = 0;
    double length = 0.0;
    int r = 1;
  };
  std::vector<Edge> edges;
  std::vector<double> p;  // gluing weights, magnitudes
  double kappa = 0.0;     // 2 Area(E)
  double ergodic_area = 0.0;
};

}  // namespace fwlab
