#include "thm/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace thm {

double QuadratureRule::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureRule segment_rule(Vec2 a, Vec2 b, int order) {
  const int npts = order / 2 + 1;  // exact to 2*npts-1 >= order
  std::vector<double> x, w;
  gauss_legendre(npts, x, w);
  QuadratureRule rule;
  rule.points.reserve(npts);
  rule.weights.reserve(npts);
  const double half_len = 0.5 * (b - a).norm();
  const Vec2 mid = 0.5 * (a + b);
  const Vec2 dir = 0.5 * (b - a);
  for (int i = 0; i < npts; ++i) {
    rule.points.push_back(mid + x[i] * dir);
    rule.weights.push_back(w[i] * half_len);
  }
  return rule;
}

QuadratureRule triangle_rule(Vec2 a, Vec2 b, Vec2 c, int order) {
  // Collapsed-square construction: r = xi, s = eta*(1-xi) with Jacobian
  // (1-xi); the extra factor raises the xi-degree by one.
  const int k = (order + 2) / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre(k, x, w);
  const double signed_area =
      0.5 * ((b - a).cross(c - a));  // may be negative (signed fan)
  QuadratureRule rule;
  rule.points.reserve(static_cast<std::size_t>(k) * k);
  rule.weights.reserve(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i) {
    const double xi = 0.5 * (x[i] + 1.0);
    const double wi = 0.5 * w[i];
    for (int j = 0; j < k; ++j) {
      const double eta = 0.5 * (x[j] + 1.0);
      const double wj = 0.5 * w[j];
      const double r = xi;
      const double s = eta * (1.0 - xi);
      const Vec2 p = a + r * (b - a) + s * (c - a);
      rule.points.push_back(p);
      rule.weights.push_back(2.0 * signed_area * wi * wj * (1.0 - xi));
    }
  }
  return rule;
}

QuadratureRule polygon_rule(std::span<const Vec2> pts, int order) {
  if (pts.size() < 3)
    throw std::invalid_argument("polygon_rule: need at least 3 vertices");
  const Vec2 g = polygon_centroid(pts);
  QuadratureRule rule;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    QuadratureRule tri =
        triangle_rule(g, pts[i], pts[(i + 1) % pts.size()], order);
    rule.points.insert(rule.points.end(), tri.points.begin(),
                       tri.points.end());
    rule.weights.insert(rule.weights.end(), tri.weights.begin(),
                        tri.weights.end());
  }
  return rule;
}

double polygon_monomial_integral(std::span<const Vec2> pts, int px, int py) {
  // int x^px y^py dA = sum_edges int x^(px+1)/(px+1) y^py dy
  const int deg = px + 1 + py;
  const int k = deg / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre(k, x, w);
  double total = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t e = 0; e < n; ++e) {
    const Vec2 a = pts[e];
    const Vec2 b = pts[(e + 1) % n];
    const double dy = b.y - a.y;
    if (dy == 0.0) continue;
    double edge = 0.0;
    for (int i = 0; i < k; ++i) {
      const double t = 0.5 * (x[i] + 1.0);
      const double xx = a.x + t * (b.x - a.x);
      const double yy = a.y + t * (b.y - a.y);
      edge += 0.5 * w[i] * std::pow(xx, px + 1) * std::pow(yy, py);
    }
    total += edge * dy;
  }
  return total / (px + 1);
}

}  // namespace thm
