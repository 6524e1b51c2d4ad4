#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "thm/geometry.hpp"

namespace thm {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Face {
  int v0 = -1;
  int v1 = -1;
  int owner = -1;
  int neighbor = -1;  // -1 on boundary
  Vec2 normal;        // unit, owner -> neighbor (outward on boundary)
  double length = 0.0;
  Vec2 midpoint;
  int boundary_tag = -1;  // -1 interior; 0..3 = bottom/right/top/left; 4 other

  bool is_boundary() const { return neighbor < 0; }
};

// Immutable after construction; safe to share read-only across threads.
struct PolyMesh {
  std::vector<Vec2> vertices;
  std::vector<std::vector<int>> cells;  // CCW vertex loops
  std::vector<Face> faces;
  std::vector<double> cell_diameter;
  std::vector<double> cell_area;
  std::vector<Vec2> cell_centroid;
  std::vector<std::vector<int>> cell_faces;
  Rect domain;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_faces() const { return static_cast<int>(faces.size()); }
  int n_interior_faces() const;
  int n_boundary_faces() const;
  double max_h() const;
  double total_area() const;
  std::vector<Vec2> cell_points(int c) const;
};

struct RegularityReport {
  double min_simplex_ratio = 0.0;   // min over faces of d*|S|/(|F|*h)
  double max_neighbor_h_ratio = 1.0;
  std::vector<int> worst_face_per_cell;
  std::vector<double> worst_ratio_per_cell;
};

// Builds face topology from raw loops and validates all mesh invariants.
// Vertex coordinates are taken as-is (no snapping).
PolyMesh build_mesh(std::vector<Vec2> vertices,
                    std::vector<std::vector<int>> cells);

// Clipped Voronoi diagram of n_cells random seeds in `domain` after
// `lloyd_iterations` centroid relaxations. Deterministic for a fixed seed.
PolyMesh generate_voronoi(int n_cells, const Rect& domain,
                          std::uint64_t rng_seed, int lloyd_iterations);

// Same construction from explicitly placed seed sites.
PolyMesh generate_voronoi_from_sites(std::vector<Vec2> sites,
                                     const Rect& domain,
                                     int lloyd_iterations);

PolyMesh load_mesh(const std::string& path);
void save_mesh(const PolyMesh& mesh, const std::string& path);

RegularityReport check_regularity(const PolyMesh& mesh);

// Max over `trials` random degree-l polynomials and all cells of
// ||v||_{dK} h^{1/2} / (l ||v||_K); a mesh-quality diagnostic for the
// trace-inverse constant.
double measure_trace_constant(const PolyMesh& mesh, int degree, int trials,
                              std::uint64_t seed = 7);

}  // namespace thm
