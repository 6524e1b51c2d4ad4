#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "thm/mesh.hpp"
#include "thm/quadrature.hpp"

namespace thm {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;

// Shifted-scaled monomial basis of P^l on [-1,1]^2 coordinates; ordering is
// by total degree, x-power descending within a degree.
struct Monomials {
  int degree = 0;
  std::vector<std::pair<int, int>> powers;

  explicit Monomials(int deg);
  int count() const { return static_cast<int>(powers.size()); }
  void values(double X, double Y, double* row) const;
  // Derivatives w.r.t. the physical coordinates given box half-extents.
  void gradients(double X, double Y, double inv_sx, double inv_sy, double* dx,
                 double* dy) const;
  void seconds(double X, double Y, double inv_sx, double inv_sy, double* dxx,
               double* dxy, double* dyy) const;
};

// Broken polynomial space of degree l with a per-element L2-orthonormal
// modal basis (Gram-Cholesky on bounding-box monomials, refined once).
class FESpace {
 public:
  FESpace(const PolyMesh& mesh, int degree, int components = 1);

  const PolyMesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  int components() const { return components_; }
  int nloc() const { return nloc_; }  // scalar local dimension
  int n_cells() const { return mesh_->n_cells(); }
  int n_scalar_dofs() const { return nloc_ * n_cells(); }
  int n_dofs() const { return components_ * n_scalar_dofs(); }

  int dof(int cell, int comp, int j) const {
    return (cell * components_ + comp) * nloc_ + j;
  }

  // Same per-element basis viewed with a different component count.
  FESpace with_components(int components) const {
    FESpace copy(*this);
    copy.components_ = components;
    return copy;
  }

  // Basis tableaus at arbitrary physical points inside the cell's box.
  void basis_values(int cell, std::span<const Vec2> pts, RowMat& phi) const;
  void basis_all(int cell, std::span<const Vec2> pts, RowMat& phi, RowMat& dx,
                 RowMat& dy) const;
  void basis_seconds(int cell, std::span<const Vec2> pts, RowMat& dxx,
                     RowMat& dxy, RowMat& dyy) const;

 private:
  const PolyMesh* mesh_;
  int degree_;
  int components_;
  int nloc_;
  Monomials mono_;
  std::vector<Vec2> box_center_;
  std::vector<Vec2> box_half_;
  std::vector<RowMat> coeff_;  // nmono x nloc per element

  void monomial_tables(int cell, std::span<const Vec2> pts, RowMat* vals,
                       RowMat* dx, RowMat* dy, RowMat* dxx, RowMat* dxy,
                       RowMat* dyy) const;
};

// Element-wise L2 projection; quadrature order 2*degree+2.
Eigen::VectorXd project(const std::function<double(Vec2)>& f,
                        const FESpace& space, int comp = 0);
Eigen::VectorXd project_vector(const std::function<Vec2(Vec2)>& f,
                               const FESpace& space);

struct ScalarEval {
  std::vector<double> value;
  std::vector<Vec2> grad;
};

struct VectorEval {
  std::vector<Vec2> value;
  std::vector<double> div;
  std::vector<Sym2> eps;  // symmetric gradient
};

// Pointwise evaluation of a discrete field on one cell. `coeffs` is the
// space-wide coefficient vector (component `comp` for scalar evaluation).
ScalarEval evaluate_scalar(const FESpace& space, const Eigen::VectorXd& coeffs,
                           int cell, std::span<const Vec2> pts, int comp = 0);
VectorEval evaluate_vector(const FESpace& space, const Eigen::VectorXd& coeffs,
                           int cell, std::span<const Vec2> pts);

// Cached quadrature and basis tableaus used by the assemblers.
struct CellTable {
  QuadratureRule rule;
  RowMat phi, dx, dy;  // npts x nloc
};

struct FaceSideTable {
  RowMat phi, dx, dy;
};

struct FaceTable {
  QuadratureRule rule;
  FaceSideTable side[2];  // [0] owner, [1] neighbor (unused on boundary)
};

struct SpaceTables {
  const FESpace* space = nullptr;
  int volume_order = 0;
  int face_order = 0;
  std::vector<CellTable> cells;
  std::vector<FaceTable> faces;
};

SpaceTables build_tables(const FESpace& space, int volume_order,
                         int face_order);

}  // namespace thm
