#include "thm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

#include "thm/quadrature.hpp"

namespace thm {

int PolyMesh::n_interior_faces() const {
  int n = 0;
  for (const Face& f : faces)
    if (!f.is_boundary()) ++n;
  return n;
}

int PolyMesh::n_boundary_faces() const {
  return n_faces() - n_interior_faces();
}

double PolyMesh::max_h() const {
  double h = 0.0;
  for (double d : cell_diameter) h = std::max(h, d);
  return h;
}

double PolyMesh::total_area() const {
  double a = 0.0;
  for (double v : cell_area) a += v;
  return a;
}

std::vector<Vec2> PolyMesh::cell_points(int c) const {
  std::vector<Vec2> pts;
  pts.reserve(cells[c].size());
  for (int v : cells[c]) pts.push_back(vertices[v]);
  return pts;
}

namespace {

int classify_boundary_tag(const Rect& dom, Vec2 a, Vec2 b) {
  const double tol = 1e-9 * std::max(dom.width(), dom.height());
  auto on = [tol](double u, double v) { return std::abs(u - v) <= tol; };
  if (on(a.y, dom.lo.y) && on(b.y, dom.lo.y)) return 0;
  if (on(a.x, dom.hi.x) && on(b.x, dom.hi.x)) return 1;
  if (on(a.y, dom.hi.y) && on(b.y, dom.hi.y)) return 2;
  if (on(a.x, dom.lo.x) && on(b.x, dom.lo.x)) return 3;
  return 4;
}

}  // namespace

PolyMesh build_mesh(std::vector<Vec2> vertices,
                    std::vector<std::vector<int>> cells) {
  PolyMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.cells = std::move(cells);

  const int nc = mesh.n_cells();
  const int nv = static_cast<int>(mesh.vertices.size());
  mesh.cell_area.resize(nc);
  mesh.cell_diameter.resize(nc);
  mesh.cell_centroid.resize(nc);
  mesh.cell_faces.assign(nc, {});

  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const Vec2& p : mesh.vertices) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  mesh.domain = {lo, hi};

  for (int c = 0; c < nc; ++c) {
    const auto& loop = mesh.cells[c];
    if (loop.size() < 3)
      throw MeshError("cell " + std::to_string(c) + " has fewer than 3 vertices");
    for (int v : loop)
      if (v < 0 || v >= nv)
        throw MeshError("cell " + std::to_string(c) +
                        " references invalid vertex " + std::to_string(v));
    const auto pts = mesh.cell_points(c);
    const double area = polygon_signed_area(pts);
    if (area <= 0.0)
      throw MeshError("cell " + std::to_string(c) +
                      " is clockwise or degenerate (signed area " +
                      std::to_string(area) + ")");
    if (!polygon_is_simple(pts))
      throw MeshError("cell " + std::to_string(c) + " is self-intersecting");
    mesh.cell_area[c] = area;
    mesh.cell_diameter[c] = polygon_diameter(pts);
    mesh.cell_centroid[c] = polygon_centroid(pts);
  }

  // Edge key -> face index; first visit creates the face (owner side).
  std::map<std::pair<int, int>, int> edge_map;
  for (int c = 0; c < nc; ++c) {
    const auto& loop = mesh.cells[c];
    const int k = static_cast<int>(loop.size());
    for (int e = 0; e < k; ++e) {
      const int a = loop[e];
      const int b = loop[(e + 1) % k];
      if (a == b)
        throw MeshError("cell " + std::to_string(c) + " repeats vertex " +
                        std::to_string(a));
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto it = edge_map.find(key);
      if (it == edge_map.end()) {
        Face f;
        f.v0 = a;
        f.v1 = b;
        f.owner = c;
        const Vec2 pa = mesh.vertices[a];
        const Vec2 pb = mesh.vertices[b];
        const Vec2 d = pb - pa;
        f.length = d.norm();
        f.normal = Vec2{d.y, -d.x} * (1.0 / f.length);
        f.midpoint = 0.5 * (pa + pb);
        edge_map.emplace(key, mesh.n_faces());
        mesh.faces.push_back(f);
      } else {
        Face& f = mesh.faces[it->second];
        if (f.neighbor >= 0)
          throw MeshError("edge (" + std::to_string(key.first) + "," +
                          std::to_string(key.second) +
                          ") is shared by more than two cells");
        if (f.v0 != b || f.v1 != a)
          throw MeshError("cells " + std::to_string(f.owner) + " and " +
                          std::to_string(c) +
                          " traverse a shared edge in the same direction");
        f.neighbor = c;
      }
    }
  }
  for (Face& f : mesh.faces)
    if (f.is_boundary())
      f.boundary_tag = classify_boundary_tag(mesh.domain, mesh.vertices[f.v0],
                                             mesh.vertices[f.v1]);
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    mesh.cell_faces[mesh.faces[fi].owner].push_back(fi);
    if (!mesh.faces[fi].is_boundary())
      mesh.cell_faces[mesh.faces[fi].neighbor].push_back(fi);
  }
  return mesh;
}

namespace {

// Deterministic uniform double in [0, 1); avoids the implementation-defined
// std::uniform_real_distribution.
double next_unit(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

struct SiteGrid {
  Rect domain;
  int nx = 1, ny = 1;
  std::vector<std::vector<int>> buckets;

  explicit SiteGrid(const Rect& dom, int n_sites) : domain(dom) {
    const int n = std::max(1, static_cast<int>(std::sqrt(n_sites)));
    nx = ny = n;
    buckets.assign(static_cast<std::size_t>(nx) * ny, {});
  }

  int bucket_of(Vec2 p) const {
    int ix = static_cast<int>((p.x - domain.lo.x) / domain.width() * nx);
    int iy = static_cast<int>((p.y - domain.lo.y) / domain.height() * ny);
    ix = std::clamp(ix, 0, nx - 1);
    iy = std::clamp(iy, 0, ny - 1);
    return iy * nx + ix;
  }

  void build(std::span<const Vec2> sites) {
    for (auto& b : buckets) b.clear();
    for (int i = 0; i < static_cast<int>(sites.size()); ++i)
      buckets[bucket_of(sites[i])].push_back(i);
  }

  // Sites within ring distance `ring` (in buckets) of the bucket of p.
  void collect_ring(Vec2 p, int ring, std::vector<int>& out) const {
    const int b = bucket_of(p);
    const int cx = b % nx;
    const int cy = b / nx;
    for (int iy = std::max(0, cy - ring); iy <= std::min(ny - 1, cy + ring);
         ++iy) {
      for (int ix = std::max(0, cx - ring); ix <= std::min(nx - 1, cx + ring);
           ++ix) {
        if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring) continue;
        const auto& bucket = buckets[iy * nx + ix];
        out.insert(out.end(), bucket.begin(), bucket.end());
      }
    }
  }
};

// Sutherland-Hodgman clip against half-plane {x : (x - m) . d <= 0}.
void clip_halfplane(std::vector<Vec2>& poly, Vec2 m, Vec2 d,
                    std::vector<Vec2>& scratch) {
  scratch.clear();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % n];
    const double sp = (p - m).dot(d);
    const double sq = (q - m).dot(d);
    if (sp <= 0.0) {
      scratch.push_back(p);
      if (sq > 0.0) {
        const double t = sp / (sp - sq);
        scratch.push_back(p + t * (q - p));
      }
    } else if (sq <= 0.0) {
      const double t = sp / (sp - sq);
      scratch.push_back(p + t * (q - p));
    }
  }
  poly.swap(scratch);
}

// Voronoi cell of site i clipped to the domain rectangle. Only sites whose
// bisector can still cut the current polygon are visited (security radius).
std::vector<Vec2> voronoi_cell(int i, std::span<const Vec2> sites,
                               const SiteGrid& grid, const Rect& domain) {
  std::vector<Vec2> poly = domain.corners();
  std::vector<Vec2> scratch;
  const Vec2 si = sites[i];

  std::vector<int> ring, candidates;
  std::vector<std::pair<double, int>> ordered;
  const int max_ring = std::max(grid.nx, grid.ny);
  double r2max = 0.0;
  for (const Vec2& v : poly) r2max = std::max(r2max, (v - si).squared_norm());

  const double bucket_w = domain.width() / grid.nx;
  const double bucket_h = domain.height() / grid.ny;
  const double bucket_min = std::min(bucket_w, bucket_h);

  for (int ringno = 0; ringno <= max_ring; ++ringno) {
    // A site farther than 2*rmax cannot cut the cell; once the nearest
    // possible site of this ring exceeds that bound we are done.
    const double ring_min_dist = (ringno - 1) * bucket_min;
    if (ringno > 1 && ring_min_dist * ring_min_dist > 4.0 * r2max) break;
    ring.clear();
    grid.collect_ring(si, ringno, ring);
    ordered.clear();
    for (int j : ring) {
      if (j == i) continue;
      ordered.emplace_back((sites[j] - si).squared_norm(), j);
    }
    std::sort(ordered.begin(), ordered.end());
    for (auto [d2, j] : ordered) {
      if (d2 > 4.0 * r2max) continue;
      const Vec2 sj = sites[j];
      const Vec2 m = 0.5 * (si + sj);
      clip_halfplane(poly, m, sj - si, scratch);
      if (poly.size() < 3)
        throw MeshError("voronoi cell of site " + std::to_string(i) +
                        " collapsed while clipping against site " +
                        std::to_string(j));
      r2max = 0.0;
      for (const Vec2& v : poly)
        r2max = std::max(r2max, (v - si).squared_norm());
    }
  }
  return poly;
}

void check_site_separation(std::span<const Vec2> sites, const SiteGrid& grid,
                           double scale) {
  const double tol = 1e-12 * scale;
  std::vector<int> near;
  for (int i = 0; i < static_cast<int>(sites.size()); ++i) {
    near.clear();
    grid.collect_ring(sites[i], 0, near);
    grid.collect_ring(sites[i], 1, near);
    for (int j : near) {
      if (j <= i) continue;
      if ((sites[i] - sites[j]).norm() < tol)
        throw MeshError("degenerate seed configuration: sites " +
                        std::to_string(i) + " and " + std::to_string(j) +
                        " coincide");
    }
  }
}

// Quantized vertex merging; vertices computed independently by adjacent
// cells differ only by roundoff.
struct VertexMerger {
  double tol;
  std::unordered_map<std::uint64_t, std::vector<int>> map;
  std::vector<Vec2> points;

  explicit VertexMerger(double tol_) : tol(tol_) {}

  static std::uint64_t key(std::int64_t qx, std::int64_t qy) {
    return (static_cast<std::uint64_t>(qx) << 32) ^
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(qy));
  }

  int insert(Vec2 p) {
    const std::int64_t qx = static_cast<std::int64_t>(std::floor(p.x / tol));
    const std::int64_t qy = static_cast<std::int64_t>(std::floor(p.y / tol));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = map.find(key(qx + dx, qy + dy));
        if (it == map.end()) continue;
        for (int id : it->second)
          if ((points[id] - p).norm() <= tol) return id;
      }
    }
    const int id = static_cast<int>(points.size());
    points.push_back(p);
    map[key(qx, qy)].push_back(id);
    return id;
  }
};

}  // namespace

PolyMesh generate_voronoi(int n_cells, const Rect& domain,
                          std::uint64_t rng_seed, int lloyd_iterations) {
  if (n_cells < 1) throw MeshError("generate_voronoi: n_cells must be >= 1");
  if (domain.width() <= 0.0 || domain.height() <= 0.0)
    throw MeshError("generate_voronoi: degenerate domain");

  std::mt19937_64 eng(rng_seed);
  std::vector<Vec2> sites(n_cells);
  for (Vec2& s : sites)
    s = {domain.lo.x + next_unit(eng) * domain.width(),
         domain.lo.y + next_unit(eng) * domain.height()};
  return generate_voronoi_from_sites(std::move(sites), domain,
                                     lloyd_iterations);
}

PolyMesh generate_voronoi_from_sites(std::vector<Vec2> sites,
                                     const Rect& domain,
                                     int lloyd_iterations) {
  const int n_cells = static_cast<int>(sites.size());
  if (n_cells < 1) throw MeshError("generate_voronoi: n_cells must be >= 1");
  if (domain.width() <= 0.0 || domain.height() <= 0.0)
    throw MeshError("generate_voronoi: degenerate domain");

  const double scale = std::max(domain.width(), domain.height());
  std::vector<std::vector<Vec2>> cells(n_cells);
  for (int iter = 0; iter <= lloyd_iterations; ++iter) {
    SiteGrid grid(domain, n_cells);
    grid.build(sites);
    check_site_separation(sites, grid, scale);
    for (int i = 0; i < n_cells; ++i)
      cells[i] = voronoi_cell(i, sites, grid, domain);
    if (iter == lloyd_iterations) break;
    for (int i = 0; i < n_cells; ++i)
      sites[i] = polygon_centroid(cells[i]);
  }

  VertexMerger merger(1e-9 * scale);
  std::vector<std::vector<int>> loops(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    std::vector<int>& loop = loops[i];
    for (const Vec2& p : cells[i]) {
      const int id = merger.insert(p);
      if (loop.empty() || loop.back() != id) loop.push_back(id);
    }
    while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
    if (loop.size() < 3)
      throw MeshError("voronoi cell of site " + std::to_string(i) +
                      " degenerated during vertex merging");
  }
  PolyMesh mesh = build_mesh(std::move(merger.points), std::move(loops));
  mesh.domain = domain;
  for (Face& f : mesh.faces)
    if (f.is_boundary())
      f.boundary_tag =
          classify_boundary_tag(domain, mesh.vertices[f.v0], mesh.vertices[f.v1]);
  return mesh;
}

PolyMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file: " + path);
  int nv = 0, nc = 0;
  if (!(in >> nv >> nc) || nv < 3 || nc < 1)
    throw MeshError("malformed mesh header in " + path);
  std::vector<Vec2> vertices(nv);
  for (int i = 0; i < nv; ++i)
    if (!(in >> vertices[i].x >> vertices[i].y))
      throw MeshError("malformed vertex line " + std::to_string(i) + " in " +
                      path);
  std::vector<std::vector<int>> cells(nc);
  for (int c = 0; c < nc; ++c) {
    int k = 0;
    if (!(in >> k) || k < 3)
      throw MeshError("malformed cell line " + std::to_string(c) + " in " +
                      path);
    cells[c].resize(k);
    for (int j = 0; j < k; ++j)
      if (!(in >> cells[c][j]))
        throw MeshError("malformed cell line " + std::to_string(c) + " in " +
                        path);
  }
  return build_mesh(std::move(vertices), std::move(cells));
}

void save_mesh(const PolyMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file: " + path);
  out << mesh.vertices.size() << ' ' << mesh.cells.size() << '\n';
  char buf[64];
  for (const Vec2& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", v.x, v.y);
    out << buf;
  }
  for (const auto& cell : mesh.cells) {
    out << cell.size();
    for (int v : cell) out << ' ' << v;
    out << '\n';
  }
}

RegularityReport check_regularity(const PolyMesh& mesh) {
  RegularityReport rep;
  rep.min_simplex_ratio = 1e300;
  rep.worst_face_per_cell.assign(mesh.n_cells(), -1);
  rep.worst_ratio_per_cell.assign(mesh.n_cells(), 1e300);
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    for (int side = 0; side < (f.is_boundary() ? 1 : 2); ++side) {
      const int c = side == 0 ? f.owner : f.neighbor;
      const Vec2 g = mesh.cell_centroid[c];
      const double s_area = 0.5 * std::abs((mesh.vertices[f.v1] -
                                            mesh.vertices[f.v0])
                                               .cross(g - mesh.vertices[f.v0]));
      const double ratio = 2.0 * s_area / (f.length * mesh.cell_diameter[c]);
      if (ratio < rep.worst_ratio_per_cell[c]) {
        rep.worst_ratio_per_cell[c] = ratio;
        rep.worst_face_per_cell[c] = fi;
      }
      rep.min_simplex_ratio = std::min(rep.min_simplex_ratio, ratio);
    }
    if (!f.is_boundary()) {
      const double ha = mesh.cell_diameter[f.owner];
      const double hb = mesh.cell_diameter[f.neighbor];
      rep.max_neighbor_h_ratio =
          std::max(rep.max_neighbor_h_ratio, std::max(ha / hb, hb / ha));
    }
  }
  return rep;
}

double measure_trace_constant(const PolyMesh& mesh, int degree, int trials,
                              std::uint64_t seed) {
  if (degree < 1)
    throw std::invalid_argument("measure_trace_constant: degree must be >= 1");
  const int nmono = (degree + 1) * (degree + 2) / 2;
  std::mt19937_64 eng(seed);
  std::vector<double> coeff(nmono);

  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    for (double& c : coeff) c = 2.0 * next_unit(eng) - 1.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const auto pts = mesh.cell_points(c);
      Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
      for (const Vec2& p : pts) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
      }
      const Vec2 mid = 0.5 * (lo + hi);
      const Vec2 half = 0.5 * (hi - lo);
      auto eval = [&](Vec2 p) {
        const double X = (p.x - mid.x) / half.x;
        const double Y = (p.y - mid.y) / half.y;
        double v = 0.0;
        int k = 0;
        for (int d = 0; d <= degree; ++d)
          for (int i = d; i >= 0; --i)
            v += coeff[k++] * std::pow(X, i) * std::pow(Y, d - i);
        return v;
      };
      const QuadratureRule vol = polygon_rule(pts, 2 * degree);
      double norm2_vol = 0.0;
      for (std::size_t q = 0; q < vol.size(); ++q) {
        const double v = eval(vol.points[q]);
        norm2_vol += vol.weights[q] * v * v;
      }
      if (norm2_vol < 1e-28) continue;  // zero polynomial rejected
      double norm2_bnd = 0.0;
      for (std::size_t e = 0; e < pts.size(); ++e) {
        const QuadratureRule edge =
            segment_rule(pts[e], pts[(e + 1) % pts.size()], 2 * degree);
        for (std::size_t q = 0; q < edge.size(); ++q) {
          const double v = eval(edge.points[q]);
          norm2_bnd += edge.weights[q] * v * v;
        }
      }
      const double ratio = std::sqrt(norm2_bnd) *
                           std::sqrt(mesh.cell_diameter[c]) /
                           (degree * std::sqrt(norm2_vol));
      worst = std::max(worst, ratio);
    }
  }
  return worst;
}

}  // namespace thm
