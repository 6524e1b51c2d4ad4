#include "thm/fespace.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "thm/kernels.hpp"

namespace thm {

Monomials::Monomials(int deg) : degree(deg) {
  for (int d = 0; d <= deg; ++d)
    for (int i = d; i >= 0; --i) powers.emplace_back(i, d - i);
}

void Monomials::values(double X, double Y, double* row) const {
  double xp[32], yp[32];
  xp[0] = yp[0] = 1.0;
  for (int k = 1; k <= degree; ++k) {
    xp[k] = xp[k - 1] * X;
    yp[k] = yp[k - 1] * Y;
  }
  for (int k = 0; k < count(); ++k)
    row[k] = xp[powers[k].first] * yp[powers[k].second];
}

void Monomials::gradients(double X, double Y, double inv_sx, double inv_sy,
                          double* dx, double* dy) const {
  double xp[32], yp[32];
  xp[0] = yp[0] = 1.0;
  for (int k = 1; k <= degree; ++k) {
    xp[k] = xp[k - 1] * X;
    yp[k] = yp[k - 1] * Y;
  }
  for (int k = 0; k < count(); ++k) {
    const int i = powers[k].first;
    const int j = powers[k].second;
    dx[k] = i > 0 ? i * xp[i - 1] * yp[j] * inv_sx : 0.0;
    dy[k] = j > 0 ? j * xp[i] * yp[j - 1] * inv_sy : 0.0;
  }
}

void Monomials::seconds(double X, double Y, double inv_sx, double inv_sy,
                        double* dxx, double* dxy, double* dyy) const {
  double xp[32], yp[32];
  xp[0] = yp[0] = 1.0;
  for (int k = 1; k <= degree; ++k) {
    xp[k] = xp[k - 1] * X;
    yp[k] = yp[k - 1] * Y;
  }
  for (int k = 0; k < count(); ++k) {
    const int i = powers[k].first;
    const int j = powers[k].second;
    dxx[k] = i > 1 ? i * (i - 1) * xp[i - 2] * yp[j] * inv_sx * inv_sx : 0.0;
    dxy[k] = (i > 0 && j > 0)
                 ? i * j * xp[i - 1] * yp[j - 1] * inv_sx * inv_sy
                 : 0.0;
    dyy[k] = j > 1 ? j * (j - 1) * xp[i] * yp[j - 2] * inv_sy * inv_sy : 0.0;
  }
}

FESpace::FESpace(const PolyMesh& mesh, int degree, int components)
    : mesh_(&mesh),
      degree_(degree),
      components_(components),
      nloc_((degree + 1) * (degree + 2) / 2),
      mono_(degree) {
  if (degree < 1 || degree > 30)
    throw std::invalid_argument("FESpace: degree must be in [1, 30]");
  if (components != 1 && components != 2)
    throw std::invalid_argument("FESpace: components must be 1 or 2");

  const int nc = mesh.n_cells();
  box_center_.resize(nc);
  box_half_.resize(nc);
  coeff_.resize(nc);

  const int nmono = mono_.count();
  for (int c = 0; c < nc; ++c) {
    const auto pts = mesh.cell_points(c);
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Vec2& p : pts) {
      lo.x = std::min(lo.x, p.x);
      lo.y = std::min(lo.y, p.y);
      hi.x = std::max(hi.x, p.x);
      hi.y = std::max(hi.y, p.y);
    }
    box_center_[c] = 0.5 * (lo + hi);
    box_half_[c] = 0.5 * (hi - lo);
    if (box_half_[c].x <= 0.0 || box_half_[c].y <= 0.0 ||
        mesh.cell_area[c] <= 0.0)
      throw std::runtime_error("FESpace: degenerate element " +
                               std::to_string(c));

    const QuadratureRule rule = polygon_rule(pts, 2 * degree + 2);
    const std::size_t nq = rule.size();
    RowMat mono(nq, nmono);
    for (std::size_t q = 0; q < nq; ++q) {
      const double X = (rule.points[q].x - box_center_[c].x) / box_half_[c].x;
      const double Y = (rule.points[q].y - box_center_[c].y) / box_half_[c].y;
      mono_.values(X, Y, mono.row(q).data());
    }
    RowMat wmono(nq, nmono);
    kernels::scale_rows(wmono.data(), mono.data(), rule.weights.data(), nq,
                        nmono);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nmono, nmono);
    {
      RowMat g = RowMat::Zero(nmono, nmono);
      kernels::gemm_tn_acc(g.data(), mono.data(), wmono.data(), nq, nmono,
                           nmono);
      gram = g;
    }
    // C = L^{-T}; one refinement pass absorbs roundoff for high degrees.
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("FESpace: Gram factorization failed on element " +
                               std::to_string(c));
    Eigen::MatrixXd c1 = llt.matrixL().transpose().solve(
        Eigen::MatrixXd::Identity(nmono, nmono));
    Eigen::MatrixXd gram2 = c1.transpose() * gram * c1;
    Eigen::LLT<Eigen::MatrixXd> llt2(gram2);
    if (llt2.info() == Eigen::Success) {
      c1 = c1 * llt2.matrixL().transpose().solve(
                    Eigen::MatrixXd::Identity(nmono, nmono));
    }
    coeff_[c] = c1;
  }
}

void FESpace::monomial_tables(int cell, std::span<const Vec2> pts,
                              RowMat* vals, RowMat* dx, RowMat* dy,
                              RowMat* dxx, RowMat* dxy, RowMat* dyy) const {
  const int nmono = mono_.count();
  const std::size_t nq = pts.size();
  const Vec2 c = box_center_[cell];
  const Vec2 s = box_half_[cell];
  const double isx = 1.0 / s.x;
  const double isy = 1.0 / s.y;
  if (vals) vals->resize(nq, nmono);
  if (dx) dx->resize(nq, nmono);
  if (dy) dy->resize(nq, nmono);
  if (dxx) dxx->resize(nq, nmono);
  if (dxy) dxy->resize(nq, nmono);
  if (dyy) dyy->resize(nq, nmono);
  for (std::size_t q = 0; q < nq; ++q) {
    const double X = (pts[q].x - c.x) * isx;
    const double Y = (pts[q].y - c.y) * isy;
    if (vals) mono_.values(X, Y, vals->row(q).data());
    if (dx || dy)
      mono_.gradients(X, Y, isx, isy, dx->row(q).data(), dy->row(q).data());
    if (dxx || dxy || dyy)
      mono_.seconds(X, Y, isx, isy, dxx->row(q).data(), dxy->row(q).data(),
                    dyy->row(q).data());
  }
}

namespace {

void combine(const RowMat& mono, const RowMat& coeff, RowMat& out) {
  out = RowMat::Zero(mono.rows(), coeff.cols());
  kernels::gemm_nn_acc(out.data(), mono.data(), coeff.data(), mono.rows(),
                       mono.cols(), coeff.cols());
}

}  // namespace

void FESpace::basis_values(int cell, std::span<const Vec2> pts,
                           RowMat& phi) const {
  RowMat mono;
  monomial_tables(cell, pts, &mono, nullptr, nullptr, nullptr, nullptr,
                  nullptr);
  combine(mono, coeff_[cell], phi);
}

void FESpace::basis_all(int cell, std::span<const Vec2> pts, RowMat& phi,
                        RowMat& dx, RowMat& dy) const {
  RowMat mono, mdx, mdy;
  monomial_tables(cell, pts, &mono, &mdx, &mdy, nullptr, nullptr, nullptr);
  combine(mono, coeff_[cell], phi);
  combine(mdx, coeff_[cell], dx);
  combine(mdy, coeff_[cell], dy);
}

void FESpace::basis_seconds(int cell, std::span<const Vec2> pts, RowMat& dxx,
                            RowMat& dxy, RowMat& dyy) const {
  RowMat mxx, mxy, myy;
  monomial_tables(cell, pts, nullptr, nullptr, nullptr, &mxx, &mxy, &myy);
  combine(mxx, coeff_[cell], dxx);
  combine(mxy, coeff_[cell], dxy);
  combine(myy, coeff_[cell], dyy);
}

Eigen::VectorXd project(const std::function<double(Vec2)>& f,
                        const FESpace& space, int comp) {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(space.n_dofs());
  const int nloc = space.nloc();
  for (int c = 0; c < space.n_cells(); ++c) {
    const QuadratureRule rule =
        polygon_rule(space.mesh().cell_points(c), 2 * space.degree() + 2);
    RowMat phi;
    space.basis_values(c, rule.points, phi);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double wf = rule.weights[q] * f(rule.points[q]);
      kernels::axpy(wf, phi.row(q).data(),
                    coeffs.data() + space.dof(c, comp, 0), nloc);
    }
  }
  return coeffs;
}

Eigen::VectorXd project_vector(const std::function<Vec2(Vec2)>& f,
                               const FESpace& space) {
  if (space.components() != 2)
    throw std::invalid_argument("project_vector: scalar space");
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(space.n_dofs());
  const int nloc = space.nloc();
  for (int c = 0; c < space.n_cells(); ++c) {
    const QuadratureRule rule =
        polygon_rule(space.mesh().cell_points(c), 2 * space.degree() + 2);
    RowMat phi;
    space.basis_values(c, rule.points, phi);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 v = f(rule.points[q]);
      kernels::axpy(rule.weights[q] * v.x, phi.row(q).data(),
                    coeffs.data() + space.dof(c, 0, 0), nloc);
      kernels::axpy(rule.weights[q] * v.y, phi.row(q).data(),
                    coeffs.data() + space.dof(c, 1, 0), nloc);
    }
  }
  return coeffs;
}

ScalarEval evaluate_scalar(const FESpace& space, const Eigen::VectorXd& coeffs,
                           int cell, std::span<const Vec2> pts, int comp) {
  RowMat phi, dx, dy;
  space.basis_all(cell, pts, phi, dx, dy);
  const int nloc = space.nloc();
  const double* local = coeffs.data() + space.dof(cell, comp, 0);
  ScalarEval out;
  out.value.resize(pts.size());
  out.grad.resize(pts.size());
  for (std::size_t q = 0; q < pts.size(); ++q) {
    out.value[q] = kernels::dot(phi.row(q).data(), local, nloc);
    out.grad[q] = {kernels::dot(dx.row(q).data(), local, nloc),
                   kernels::dot(dy.row(q).data(), local, nloc)};
  }
  return out;
}

VectorEval evaluate_vector(const FESpace& space, const Eigen::VectorXd& coeffs,
                           int cell, std::span<const Vec2> pts) {
  if (space.components() != 2)
    throw std::invalid_argument("evaluate_vector: scalar space");
  RowMat phi, dx, dy;
  space.basis_all(cell, pts, phi, dx, dy);
  const int nloc = space.nloc();
  const double* lx = coeffs.data() + space.dof(cell, 0, 0);
  const double* ly = coeffs.data() + space.dof(cell, 1, 0);
  VectorEval out;
  out.value.resize(pts.size());
  out.div.resize(pts.size());
  out.eps.resize(pts.size());
  for (std::size_t q = 0; q < pts.size(); ++q) {
    const double* pr = phi.row(q).data();
    const double* dxr = dx.row(q).data();
    const double* dyr = dy.row(q).data();
    out.value[q] = {kernels::dot(pr, lx, nloc), kernels::dot(pr, ly, nloc)};
    const double ux_x = kernels::dot(dxr, lx, nloc);
    const double ux_y = kernels::dot(dyr, lx, nloc);
    const double uy_x = kernels::dot(dxr, ly, nloc);
    const double uy_y = kernels::dot(dyr, ly, nloc);
    out.div[q] = ux_x + uy_y;
    out.eps[q] = {ux_x, 0.5 * (ux_y + uy_x), uy_y};
  }
  return out;
}

SpaceTables build_tables(const FESpace& space, int volume_order,
                         int face_order) {
  SpaceTables tables;
  tables.space = &space;
  tables.volume_order = volume_order;
  tables.face_order = face_order;
  const PolyMesh& mesh = space.mesh();
  tables.cells.resize(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    CellTable& t = tables.cells[c];
    t.rule = polygon_rule(mesh.cell_points(c), volume_order);
    space.basis_all(c, t.rule.points, t.phi, t.dx, t.dy);
  }
  tables.faces.resize(mesh.n_faces());
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    FaceTable& t = tables.faces[fi];
    t.rule = segment_rule(mesh.vertices[f.v0], mesh.vertices[f.v1],
                          face_order);
    space.basis_all(f.owner, t.rule.points, t.side[0].phi, t.side[0].dx,
                    t.side[0].dy);
    if (!f.is_boundary())
      space.basis_all(f.neighbor, t.rule.points, t.side[1].phi, t.side[1].dx,
                      t.side[1].dy);
  }
  return tables;
}

}  // namespace thm
