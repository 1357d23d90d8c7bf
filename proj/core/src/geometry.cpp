#include "fwlab/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace fwlab {

Vec2 wrap_unit(Vec2 p) {
  p.x -= std::floor(p.x);
  p.y -= std::floor(p.y);
  // floor of -1e-18 gives 1.0 after subtraction
  if (p.x >= 1.0) p.x = 0.0;
  if (p.y >= 1.0) p.y = 0.0;
  return p;
}

double torus_distance(Vec2 p, Vec2 q) {
  double dx = p.x - q.x, dy = p.y - q.y;
  dx -= std::round(dx);
  dy -= std::round(dy);
  return std::hypot(dx, dy);
}

double signed_area(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  // shoelace about the first vertex keeps cancellation down
  const Vec2 o = poly[0];
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) s += cross(poly[i] - o, poly[i + 1] - o);
  return 0.5 * s;
}

double perimeter(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) s += norm(poly[(i + 1) % n] - poly[i]);
  return s;
}

BBox bounding_box(const std::vector<Vec2>& poly) {
  BBox b{1e300, -1e300, 1e300, -1e300};
  for (auto p : poly) {
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  return b;
}

int winding_number(const std::vector<Vec2>& poly, Vec2 c) {
  double turn = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    Vec2 a = poly[i] - c, b = poly[(i + 1) % n] - c;
    turn += std::atan2(cross(a, b), dot(a, b));
  }
  return static_cast<int>(std::lround(turn / (2.0 * std::numbers::pi)));
}

LoopIndex::LoopIndex(std::vector<Vec2> poly, int rows) : poly_(std::move(poly)) {
  if (poly_.size() < 3) {
    poly_.clear();
    return;
  }
  box_ = bounding_box(poly_);
  const std::size_t n = poly_.size();
  rows_ = rows > 0 ? rows : std::clamp(static_cast<int>(std::sqrt(double(n))), 8, 4096);
  row_h_ = (box_.ymax - box_.ymin) / rows_;
  if (!(row_h_ > 0)) row_h_ = 1.0;

  auto row_of = [&](double y) {
    return std::clamp(static_cast<int>((y - box_.ymin) / row_h_), 0, rows_ - 1);
  };
  std::vector<std::size_t> count(rows_ + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto [lo, hi] = std::minmax(poly_[i].y, poly_[(i + 1) % n].y);
    for (int r = row_of(lo); r <= row_of(hi); ++r) ++count[r + 1];
  }
  for (int r = 0; r < rows_; ++r) count[r + 1] += count[r];
  start_ = count;
  edges_.assign(count[rows_], 0);
  std::vector<std::size_t> fill(count.begin(), count.end() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto [lo, hi] = std::minmax(poly_[i].y, poly_[(i + 1) % n].y);
    for (int r = row_of(lo); r <= row_of(hi); ++r) edges_[fill[r]++] = i;
  }
}

bool LoopIndex::contains(Vec2 p) const {
  if (poly_.empty() || !box_.contains(p)) return false;
  const int r = std::clamp(static_cast<int>((p.y - box_.ymin) / row_h_), 0, rows_ - 1);
  const std::size_t n = poly_.size();
  bool inside = false;
  for (std::size_t j = start_[r]; j < start_[r + 1]; ++j) {
    const std::size_t i = edges_[j];
    const Vec2 a = poly_[i], b = poly_[(i + 1) % n];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xc) inside = !inside;
    }
  }
  return inside;
}

}  // namespace fwlab
