#include "thm/geometry.hpp"

#include <algorithm>

namespace thm {

double polygon_signed_area(std::span<const Vec2> pts) {
  const std::size_t n = pts.size();
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = pts[i];
    const Vec2 q = pts[(i + 1) % n];
    a += p.cross(q);
  }
  return 0.5 * a;
}

Vec2 polygon_centroid(std::span<const Vec2> pts) {
  const std::size_t n = pts.size();
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = pts[i];
    const Vec2 q = pts[(i + 1) % n];
    const double w = p.cross(q);
    a += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  a *= 0.5;
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

double polygon_diameter(std::span<const Vec2> pts) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      d2 = std::max(d2, (pts[i] - pts[j]).squared_norm());
  return std::sqrt(d2);
}

namespace {

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = (b - a).cross(c - a);
  const double d2 = (b - a).cross(d - a);
  const double d3 = (d - c).cross(a - c);
  const double d4 = (d - c).cross(b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

bool polygon_is_simple(std::span<const Vec2> pts) {
  const std::size_t n = pts.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    if ((pts[(i + 1) % n] - pts[i]).norm() == 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // skip edges sharing a vertex
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j],
                             pts[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

bool point_in_convex_polygon(Vec2 p, std::span<const Vec2> pts, double tol) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = pts[i];
    const Vec2 b = pts[(i + 1) % n];
    if ((b - a).cross(p - a) < -tol) return false;
  }
  return true;
}

}  // namespace thm
