#pragma once

#include <span>
#include <vector>

#include "thm/geometry.hpp"

namespace thm {

// Quadrature points in physical coordinates; weights carry the measure
// (area for cell rules, arclength for face rules).
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  double total_weight() const;
};

// Gauss-Legendre nodes/weights on [-1, 1], exact for degree 2n-1.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);

// Rule on a segment, exact for polynomials (along the segment) of the
// requested total degree.
QuadratureRule segment_rule(Vec2 a, Vec2 b, int order);

// Rule on a triangle, exact for bivariate polynomials of the requested
// total degree (collapsed tensor-product Gauss construction).
QuadratureRule triangle_rule(Vec2 a, Vec2 b, Vec2 c, int order);

// Rule on a simple polygon via the signed centroid fan. Exact for the
// requested total degree on any simple CCW polygon.
QuadratureRule polygon_rule(std::span<const Vec2> pts, int order);

// Analytic integral of x^px * y^py over a simple polygon, computed by the
// divergence-theorem edge formula. Serves as the internal quadrature oracle.
double polygon_monomial_integral(std::span<const Vec2> pts, int px, int py);

}  // namespace thm
