#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "thm/quadrature.hpp"

using namespace thm;

namespace {

double apply(const QuadratureRule& rule, auto&& f) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q)
    s += rule.weights[q] * f(rule.points[q]);
  return s;
}

const std::vector<Vec2> unit_square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};

}  // namespace

TEST_CASE("gauss-legendre nodes integrate monomials exactly") {
  for (int n = 1; n <= 12; ++n) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], deg);
      const double exact = (deg % 2 == 0) ? 2.0 / (deg + 1) : 0.0;
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("segment rule") {
  // unit edge
  auto r = segment_rule({0, 0}, {1, 0}, 1);
  CHECK(apply(r, [](Vec2) { return 1.0; }) == doctest::Approx(1.0));
  // int_(0,0)-(1,1) x ds = sqrt(2)/2
  auto r2 = segment_rule({0, 0}, {1, 1}, 3);
  CHECK(apply(r2, [](Vec2 p) { return p.x; }) ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("polygon rule on the unit square") {
  auto r = polygon_rule(unit_square, 5);
  CHECK(apply(r, [](Vec2) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(apply(r, [](Vec2 p) { return p.x * p.x * p.y; }) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("hexagon monomials: area rule vs edge-formula oracle vs Monte Carlo") {
  std::vector<Vec2> hex;
  for (int k = 0; k < 6; ++k) {
    const double a = 2.0 * M_PI * k / 6.0 + 0.3;
    hex.push_back({0.4 + 0.35 * std::cos(a), 0.55 + 0.35 * std::sin(a)});
  }
  auto rule = polygon_rule(hex, 8);
  for (int px = 0; px <= 3; ++px) {
    for (int py = 0; py + px <= 3; ++py) {
      const double viaRule =
          apply(rule, [&](Vec2 p) { return std::pow(p.x, px) * std::pow(p.y, py); });
      const double viaEdges = polygon_monomial_integral(hex, px, py);
      CHECK(viaRule == doctest::Approx(viaEdges).epsilon(1e-12));
    }
  }

  // Monte-Carlo membership oracle for x^3 (convex hexagon)
  std::mt19937_64 eng(5);
  auto unit = [&]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
  const std::size_t samples = 10'000'000;
  std::size_t inside = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec2 p{unit(), unit()};
    if (point_in_convex_polygon(p, hex)) {
      ++inside;
      acc += p.x * p.x * p.x;
    }
  }
  const double mc = acc / static_cast<double>(samples);  // domain area = 1
  const double exact = polygon_monomial_integral(hex, 3, 0);
  CHECK(std::abs(mc - exact) < 1e-3);
}

TEST_CASE("triangle rule exactness on skewed triangle") {
  const Vec2 a{0.1, 0.2}, b{0.9, 0.3}, c{0.4, 0.8};
  for (int order = 1; order <= 10; ++order) {
    auto rule = triangle_rule(a, b, c, order);
    for (int px = 0; px <= order; ++px) {
      const int py = order - px;
      const double got =
          apply(rule, [&](Vec2 p) { return std::pow(p.x, px) * std::pow(p.y, py); });
      const double exact =
          polygon_monomial_integral(std::vector<Vec2>{a, b, c}, px, py);
      CHECK(got == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}
