#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace thm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// Symmetric 2x2 tensor.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static Sym2 identity(double s = 1.0) { return {s, 0.0, s}; }

  Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  double quad(Vec2 n) const { return n.dot(apply(n)); }  // n^T A n
  double trace() const { return xx + yy; }
  double det() const { return xx * yy - xy * xy; }
  double eig_min() const {
    const double m = 0.5 * trace();
    const double d = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return m - d;
  }
  double eig_max() const {
    const double m = 0.5 * trace();
    const double d = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return m + d;
  }
  Sym2 scaled(double s) const { return {s * xx, s * xy, s * yy}; }
};

// Signed area of a polygon (positive for counterclockwise loops).
double polygon_signed_area(std::span<const Vec2> pts);

Vec2 polygon_centroid(std::span<const Vec2> pts);

// Largest pairwise vertex distance.
double polygon_diameter(std::span<const Vec2> pts);

// True if no two non-adjacent edges intersect and no edge degenerates.
bool polygon_is_simple(std::span<const Vec2> pts);

bool point_in_convex_polygon(Vec2 p, std::span<const Vec2> pts,
                             double tol = 1e-12);

struct Rect {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{1.0, 1.0};
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double area() const { return width() * height(); }
  std::vector<Vec2> corners() const {
    return {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
  }
};

}  // namespace thm
