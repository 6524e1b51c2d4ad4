#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "thm/mesh.hpp"
#include "thm/quadrature.hpp"

using namespace thm;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

double area_variance(const PolyMesh& mesh) {
  double mean = 0;
  for (double a : mesh.cell_area) mean += a;
  mean /= mesh.n_cells();
  double var = 0;
  for (double a : mesh.cell_area) var += (a - mean) * (a - mean);
  return var / mesh.n_cells();
}

}  // namespace

TEST_CASE("one-seed voronoi is the domain") {
  PolyMesh mesh = generate_voronoi(1, Rect{}, 3, 0);
  CHECK(mesh.n_cells() == 1);
  CHECK(mesh.n_faces() == 4);
  CHECK(mesh.n_boundary_faces() == 4);
  CHECK(mesh.cell_area[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mesh.cell_diameter[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("four quarter-point seeds give congruent quarter squares") {
  const std::vector<Vec2> sites{
      {0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
  PolyMesh mesh = generate_voronoi_from_sites(sites, Rect{}, 0);
  CHECK(mesh.n_cells() == 4);
  for (int c = 0; c < 4; ++c) {
    CHECK(mesh.cell_area[c] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(mesh.cells[c].size() == 4);
    CHECK(mesh.cell_diameter[c] ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  }

  // Brute-force Voronoi by point membership on a fine grid.
  std::vector<double> est(4, 0.0);
  const int grid = 500;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Vec2 p{(i + 0.5) / grid, (j + 0.5) / grid};
      int best = 0;
      double bd = 1e300;
      for (int c = 0; c < 4; ++c) {
        const double d = (p - sites[c]).squared_norm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      est[best] += 1.0 / (grid * grid);
    }
  }
  for (int c = 0; c < 4; ++c)
    CHECK(est[c] == doctest::Approx(mesh.cell_area[c]).epsilon(1e-9));
}

TEST_CASE("coinciding seeds raise a generation error naming the sites") {
  const std::vector<Vec2> sites{{0.5, 0.5}, {0.5, 0.5}, {0.2, 0.8}};
  try {
    generate_voronoi_from_sites(sites, Rect{}, 0);
    FAIL("expected MeshError");
  } catch (const MeshError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("0") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
}

TEST_CASE("hundred-cell lloyd mesh matches the reference mesh size") {
  PolyMesh mesh = generate_voronoi(100, Rect{}, 42, 100);
  CHECK(mesh.n_cells() == 100);
  // reference h = 0.1811 within 15%
  CHECK(mesh.max_h() > 0.1811 * 0.85);
  CHECK(mesh.max_h() < 0.1811 * 1.15);
  CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("mesh invariants: faces, normals, areas") {
  PolyMesh mesh = generate_voronoi(60, Rect{}, 7, 30);
  CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-10));
  int interior = 0;
  for (const Face& f : mesh.faces) {
    CHECK(f.normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const auto& loop_o = mesh.cells[f.owner];
    auto has = [&](const std::vector<int>& loop, int v) {
      return std::find(loop.begin(), loop.end(), v) != loop.end();
    };
    CHECK(has(loop_o, f.v0));
    CHECK(has(loop_o, f.v1));
    if (!f.is_boundary()) {
      ++interior;
      CHECK(has(mesh.cells[f.neighbor], f.v0));
      CHECK(has(mesh.cells[f.neighbor], f.v1));
      // normal oriented owner -> neighbor
      const Vec2 d = mesh.cell_centroid[f.neighbor] -
                     mesh.cell_centroid[f.owner];
      CHECK(d.dot(f.normal) > 0.0);
    } else {
      const Vec2 d = f.midpoint - mesh.cell_centroid[f.owner];
      CHECK(d.dot(f.normal) > 0.0);
    }
  }
  CHECK(interior > 0);
  CHECK(mesh.n_interior_faces() + mesh.n_boundary_faces() == mesh.n_faces());
}

TEST_CASE("flipping owner and neighbor flips the normal exactly") {
  // Two unit squares sharing an edge, loaded in both orders.
  const std::string fwd =
      "6 2\n0 0\n1 0\n2 0\n0 1\n1 1\n2 1\n4 0 1 4 3\n4 1 2 5 4\n";
  const std::string rev =
      "6 2\n0 0\n1 0\n2 0\n0 1\n1 1\n2 1\n4 1 2 5 4\n4 0 1 4 3\n";
  write_file("mesh_fwd.txt", fwd);
  write_file("mesh_rev.txt", rev);
  PolyMesh a = load_mesh("mesh_fwd.txt");
  PolyMesh b = load_mesh("mesh_rev.txt");
  const Face* fa = nullptr;
  const Face* fb = nullptr;
  for (const Face& f : a.faces)
    if (!f.is_boundary()) fa = &f;
  for (const Face& f : b.faces)
    if (!f.is_boundary()) fb = &f;
  REQUIRE(fa != nullptr);
  REQUIRE(fb != nullptr);
  CHECK(fa->normal.x == -fb->normal.x);
  CHECK(fa->normal.y == -fb->normal.y);
}

TEST_CASE("load_mesh examples and validation errors") {
  write_file("mesh_single.txt", "4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\n");
  PolyMesh single = load_mesh("mesh_single.txt");
  CHECK(single.n_cells() == 1);
  CHECK(single.n_boundary_faces() == 4);
  CHECK(single.n_interior_faces() == 0);

  write_file("mesh_two.txt",
             "6 2\n0 0\n1 0\n2 0\n0 1\n1 1\n2 1\n4 0 1 4 3\n4 1 2 5 4\n");
  PolyMesh two = load_mesh("mesh_two.txt");
  CHECK(two.n_cells() == 2);
  CHECK(two.n_interior_faces() == 1);
  CHECK(two.n_boundary_faces() == 6);

  // clockwise cell
  write_file("mesh_cw.txt", "4 1\n0 0\n1 0\n1 1\n0 1\n4 0 3 2 1\n");
  CHECK_THROWS_AS(load_mesh("mesh_cw.txt"), MeshError);

  // self-intersecting (bowtie)
  write_file("mesh_bowtie.txt", "4 1\n0 0\n1 1\n1 0\n0 1\n4 0 1 2 3\n");
  CHECK_THROWS_AS(load_mesh("mesh_bowtie.txt"), MeshError);

  // save then reload round-trips topology
  PolyMesh mesh = generate_voronoi(25, Rect{}, 11, 20);
  save_mesh(mesh, "mesh_roundtrip.txt");
  PolyMesh back = load_mesh("mesh_roundtrip.txt");
  CHECK(back.n_cells() == mesh.n_cells());
  CHECK(back.n_faces() == mesh.n_faces());
  CHECK(back.total_area() == doctest::Approx(mesh.total_area()).epsilon(1e-12));
}

TEST_CASE("regularity report") {
  write_file("mesh_single2.txt", "4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\n");
  PolyMesh single = load_mesh("mesh_single2.txt");
  RegularityReport rep = check_regularity(single);
  // d |S| / (|F| h) = 2 * (1/4) / (1 * sqrt(2))
  CHECK(rep.min_simplex_ratio ==
        doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(rep.max_neighbor_h_ratio == doctest::Approx(1.0));

  PolyMesh lloyd = generate_voronoi(100, Rect{}, 42, 100);
  RegularityReport rep2 = check_regularity(lloyd);
  CHECK(rep2.min_simplex_ratio > 0.0);

  write_file("mesh_two2.txt",
             "6 2\n0 0\n1 0\n2 0\n0 1\n1 1\n2 1\n4 0 1 4 3\n4 1 2 5 4\n");
  RegularityReport rep3 = check_regularity(load_mesh("mesh_two2.txt"));
  CHECK(rep3.max_neighbor_h_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trace constant diagnostic") {
  write_file("mesh_single3.txt", "4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\n");
  PolyMesh single = load_mesh("mesh_single3.txt");
  // Constant polynomial: ||v||_dK = sqrt(perimeter) = 2, ||v||_K = 1,
  // h^(1/2) = 2^(1/4); measured max is >= the constant's ratio.
  for (int ell : {1, 2}) {
    const double c0 = 2.0 * std::pow(2.0, 0.25) / ell;
    const double measured = measure_trace_constant(single, ell, 40);
    CHECK(measured >= c0 * (1.0 - 1e-12));
    CHECK(measured < 40.0);  // finite: zero polynomials are rejected
  }
  // Bounded along a refinement sequence.
  double prev = 0.0;
  std::vector<double> values;
  for (int n : {20, 60, 180}) {
    PolyMesh mesh = generate_voronoi(n, Rect{}, 13, 40);
    values.push_back(measure_trace_constant(mesh, 2, 10));
  }
  (void)prev;
  for (double v : values) {
    CHECK(v > 0.0);
    CHECK(v < 3.0 * values.front());
  }
}

TEST_CASE("lloyd relaxation reduces area variance (fixed seed)") {
  std::vector<double> var;
  for (int it = 0; it <= 20; ++it)
    var.push_back(area_variance(generate_voronoi(64, Rect{}, 21, it)));
  for (std::size_t k = 1; k < var.size(); ++k)
    CHECK(var[k] <= var[k - 1] * (1.0 + 1e-9));
}

TEST_CASE("generation is bit-deterministic") {
  PolyMesh a = generate_voronoi(80, Rect{}, 1234, 25);
  PolyMesh b = generate_voronoi(80, Rect{}, 1234, 25);
  REQUIRE(a.vertices.size() == b.vertices.size());
  CHECK(std::memcmp(a.vertices.data(), b.vertices.data(),
                    a.vertices.size() * sizeof(Vec2)) == 0);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t c = 0; c < a.cells.size(); ++c) CHECK(a.cells[c] == b.cells[c]);
}

TEST_CASE("degenerate seeds are reported") {
  // With one cell and a degenerate domain the generator must refuse.
  CHECK_THROWS_AS(generate_voronoi(2, Rect{{0, 0}, {0, 1}}, 3, 0), MeshError);
  CHECK_THROWS_AS(generate_voronoi(0, Rect{}, 3, 0), MeshError);
}
