#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "thm/fespace.hpp"
#include "thm/kernels.hpp"

using namespace thm;

namespace {

PolyMesh lloyd_mesh(int n, std::uint64_t seed = 17, int iters = 40) {
  return generate_voronoi(n, Rect{}, seed, iters);
}

Eigen::MatrixXd gram_via_quadrature(const FESpace& space, int cell) {
  const QuadratureRule rule =
      polygon_rule(space.mesh().cell_points(cell), 2 * space.degree() + 2);
  RowMat phi;
  space.basis_values(cell, rule.points, phi);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(space.nloc(), space.nloc());
  for (std::size_t q = 0; q < rule.size(); ++q)
    g += rule.weights[q] * phi.row(q).transpose() * phi.row(q);
  return g;
}

}  // namespace

TEST_CASE("local dimensions") {
  PolyMesh mesh = lloyd_mesh(5);
  CHECK(FESpace(mesh, 1, 1).nloc() == 3);
  CHECK(FESpace(mesh, 2, 1).nloc() == 6);
  FESpace vec(mesh, 2, 2);
  CHECK(vec.nloc() == 6);
  CHECK(vec.n_dofs() == 2 * 6 * mesh.n_cells());  // local dim 12 per element
}

TEST_CASE("orthonormality: Gram equals identity") {
  PolyMesh mesh = lloyd_mesh(12);
  for (int ell : {1, 2, 4}) {
    FESpace space(mesh, ell, 1);
    for (int c : {0, 5, 11}) {
      Eigen::MatrixXd g = gram_via_quadrature(space, c);
      CHECK((g - Eigen::MatrixXd::Identity(space.nloc(), space.nloc()))
                .cwiseAbs()
                .maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("high degree stays well conditioned on lloyd cells") {
  PolyMesh mesh = lloyd_mesh(20, 23, 60);
  FESpace space(mesh, 8, 1);
  for (int c = 0; c < mesh.n_cells(); c += 7) {
    Eigen::MatrixXd g = gram_via_quadrature(space, c);
    CHECK((g - Eigen::MatrixXd::Identity(space.nloc(), space.nloc()))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    // local stiffness on the non-constant modes
    const QuadratureRule rule = polygon_rule(mesh.cell_points(c), 2 * 8);
    RowMat phi, dx, dy;
    space.basis_all(c, rule.points, phi, dx, dy);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(space.nloc(), space.nloc());
    for (std::size_t q = 0; q < rule.size(); ++q)
      k += rule.weights[q] * (dx.row(q).transpose() * dx.row(q) +
                              dy.row(q).transpose() * dy.row(q));
    Eigen::MatrixXd k1 = k.bottomRightCorner(space.nloc() - 1, space.nloc() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k1);
    const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    CHECK(cond > 0.0);
    CHECK(cond < 1e8);
  }
}

TEST_CASE("evaluation: constants, linears, finite-difference gradients") {
  PolyMesh mesh = lloyd_mesh(10);
  FESpace space(mesh, 3, 1);
  Eigen::VectorXd ones = project([](Vec2) { return 1.0; }, space);
  Eigen::VectorXd linear = project([](Vec2 p) { return p.x; }, space);

  std::mt19937_64 eng(3);
  auto unit = [&]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Vec2 g = mesh.cell_centroid[c];
    std::vector<Vec2> pts{g, {g.x + 0.01, g.y - 0.01}};
    ScalarEval ev = evaluate_scalar(space, ones, c, pts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      CHECK(ev.value[q] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(ev.grad[q].x) < 1e-10);
      CHECK(std::abs(ev.grad[q].y) < 1e-10);
    }
    ScalarEval el = evaluate_scalar(space, linear, c, pts);
    CHECK(el.grad[0].x == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(el.grad[0].y) < 1e-10);
  }

  // random coefficients: directional finite differences match gradients
  Eigen::VectorXd coeffs(space.n_dofs());
  for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = 2.0 * unit() - 1.0;
  const double step = 1e-5;
  for (int c : {0, 4, 9}) {
    const Vec2 g = mesh.cell_centroid[c];
    std::vector<Vec2> pts{g,
                          {g.x + step, g.y},
                          {g.x - step, g.y},
                          {g.x, g.y + step},
                          {g.x, g.y - step}};
    ScalarEval ev = evaluate_scalar(space, coeffs, c, pts);
    const double fdx = (ev.value[1] - ev.value[2]) / (2 * step);
    const double fdy = (ev.value[3] - ev.value[4]) / (2 * step);
    CHECK(std::abs(fdx - ev.grad[0].x) < 1e-6);
    CHECK(std::abs(fdy - ev.grad[0].y) < 1e-6);
  }
}

TEST_CASE("vector evaluation: div and symmetric gradient") {
  PolyMesh mesh = lloyd_mesh(6);
  FESpace vec(mesh, 2, 2);
  Eigen::VectorXd u = project_vector(
      [](Vec2 p) { return Vec2{p.x * p.x, p.x * p.y}; }, vec);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Vec2 g = mesh.cell_centroid[c];
    std::vector<Vec2> pts{g};
    VectorEval ev = evaluate_vector(vec, u, c, pts);
    CHECK(ev.value[0].x == doctest::Approx(g.x * g.x).epsilon(1e-10));
    CHECK(ev.div[0] == doctest::Approx(2.0 * g.x + g.x).epsilon(1e-9));
    CHECK(ev.eps[0].xx == doctest::Approx(2.0 * g.x).epsilon(1e-9));
    CHECK(ev.eps[0].xy == doctest::Approx(0.5 * g.y).epsilon(1e-9));
    CHECK(ev.eps[0].yy == doctest::Approx(g.x).epsilon(1e-9));
  }
}

TEST_CASE("projection: polynomial reproduction, idempotence, zero") {
  PolyMesh mesh = lloyd_mesh(15);
  FESpace space(mesh, 2, 1);
  auto f = [](Vec2 p) { return 1.5 - 2.0 * p.x + p.y + 0.25 * p.x * p.y; };
  Eigen::VectorXd c1 = project(f, space);
  std::mt19937_64 eng(8);
  auto unit = [&]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
  for (int trial = 0; trial < 50; ++trial) {
    const int cell = static_cast<int>(unit() * mesh.n_cells());
    const Vec2 g = mesh.cell_centroid[cell];
    std::vector<Vec2> pts{g};
    ScalarEval ev = evaluate_scalar(space, c1, cell, pts);
    CHECK(ev.value[0] == doctest::Approx(f(g)).epsilon(1e-10));
  }

  // idempotence: projecting the evaluation of a projection changes nothing
  Eigen::VectorXd c2 = project(
      [&](Vec2 p) {
        for (int cell = 0; cell < mesh.n_cells(); ++cell) {
          if (point_in_convex_polygon(p, mesh.cell_points(cell), 1e-12)) {
            std::vector<Vec2> pt{p};
            return evaluate_scalar(space, c1, cell, pt).value[0];
          }
        }
        return 0.0;
      },
      space);
  CHECK((c1 - c2).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::VectorXd z = project([](Vec2) { return 0.0; }, space);
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("projection converges at order l+1") {
  auto f = [](Vec2 p) { return std::sin(M_PI * p.x); };
  for (int ell : {1, 2}) {
    std::vector<double> errs, hs;
    for (int n : {30, 120, 480}) {
      PolyMesh mesh = lloyd_mesh(n, 31, 40);
      FESpace space(mesh, ell, 1);
      Eigen::VectorXd c = project(f, space);
      double err2 = 0.0;
      for (int cell = 0; cell < mesh.n_cells(); ++cell) {
        const QuadratureRule rule =
            polygon_rule(mesh.cell_points(cell), 2 * ell + 4);
        ScalarEval ev = evaluate_scalar(space, c, cell, rule.points);
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const double d = ev.value[q] - f(rule.points[q]);
          err2 += rule.weights[q] * d * d;
        }
      }
      errs.push_back(std::sqrt(err2));
      hs.push_back(mesh.max_h());
    }
    // least-squares slope of log(err) vs log(h)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < errs.size(); ++i) {
      const double lx = std::log(hs[i]);
      const double ly = std::log(errs[i]);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double n = static_cast<double>(errs.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope > ell + 0.6);
    CHECK(slope < ell + 1.6);
  }
}

TEST_CASE("quadrature exactness against the edge-formula oracle") {
  PolyMesh mesh = lloyd_mesh(9, 19, 25);
  const int order = 6;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto pts = mesh.cell_points(c);
    const QuadratureRule rule = polygon_rule(pts, order);
    for (int px = 0; px <= order; ++px) {
      for (int py = 0; py + px <= order; ++py) {
        double got = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q)
          got += rule.weights[q] * std::pow(rule.points[q].x, px) *
                 std::pow(rule.points[q].y, py);
        const double exact = polygon_monomial_integral(pts, px, py);
        CHECK(got == doctest::Approx(exact).epsilon(1e-12));
      }
    }
  }
}
