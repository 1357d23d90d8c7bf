#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fwlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }

// reduce to [0,1) in each coordinate
Vec2 wrap_unit(Vec2 p);
// distance on the flat torus R^2/Z^2
double torus_distance(Vec2 p, Vec2 q);

struct BBox {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool contains(Vec2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
};

// closed polygon given by its vertices (last edge joins back to the first)
double signed_area(const std::vector<Vec2>& poly);
double perimeter(const std::vector<Vec2>& poly);
BBox bounding_box(const std::vector<Vec2>& poly);
// total turning of (p_i - c) divided by 2pi
int winding_number(const std::vector<Vec2>& poly, Vec2 c);

// Even-odd point-in-polygon with the edges bucketed by row, so queries
// against loops with 10^4+ vertices stay cheap.
class LoopIndex {
 public:
  LoopIndex() = default;
  explicit LoopIndex(std::vector<Vec2> poly, int rows = 0);

  bool contains(Vec2 p) const;
  const BBox& bbox() const { return box_; }
  const std::vector<Vec2>& polygon() const { return poly_; }
  bool empty() const { return poly_.empty(); }

 private:
  std::vector<Vec2> poly_;
  BBox box_;
  int rows_ = 0;
  double row_h_ = 1.0;
  std::vector<std::size_t> start_;  // CSR offsets into edges_
  std::vector<std::size_t> edges_;
};

}  // namespace fwlab
