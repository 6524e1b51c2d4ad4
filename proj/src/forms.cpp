#include "thm/forms.hpp"

#include <cmath>
#include <stdexcept>

#include "thm/kernels.hpp"

namespace thm {

std::string variant_name(TransportVariant v) {
  switch (v) {
    case TransportVariant::old_scheme: return "old";
    case TransportVariant::vol: return "vol";
    case TransportVariant::plain: return "plain";
    case TransportVariant::stab: return "stab";
  }
  return "?";
}

TransportVariant variant_from_name(const std::string& name) {
  if (name == "old") return TransportVariant::old_scheme;
  if (name == "vol") return TransportVariant::vol;
  if (name == "plain") return TransportVariant::plain;
  if (name == "stab") return TransportVariant::stab;
  throw std::invalid_argument("unknown transport variant: " + name);
}

BlockLayout BlockLayout::create(int nloc_l, int nloc_m, int ncells) {
  BlockLayout l;
  l.nloc_l = nloc_l;
  l.nloc_m = nloc_m;
  l.ncells = ncells;
  l.off_u = 0;
  l.off_p = 2 * nloc_l * ncells;
  l.off_T = l.off_p + nloc_l * ncells;
  l.off_phi = l.off_T + nloc_l * ncells;
  l.total = l.off_phi + nloc_m * ncells;
  return l;
}

AssemblyContext AssemblyContext::create(const PolyMesh& mesh, int ell, int m,
                                        ModelParams params,
                                        PenaltyParams penalties) {
  if (ell < 1 || m < 1)
    throw std::invalid_argument("degrees must satisfy ell, m >= 1");
  if (m > ell + 1)
    throw ParameterError("degree condition m <= ell+1 violated (m=" +
                         std::to_string(m) + ", ell=" + std::to_string(ell) +
                         ")");
  if (static_cast<int>(params.elems.size()) != mesh.n_cells())
    throw ParameterError("ModelParams size does not match mesh");
  params.validate();
  penalties.validate();

  AssemblyContext ctx;
  ctx.mesh = &mesh;
  ctx.ell = ell;
  ctx.m = m;
  ctx.params = std::move(params);
  ctx.penalties = penalties;
  ctx.space_l = std::make_shared<FESpace>(mesh, ell, 1);
  ctx.space_u = std::make_shared<FESpace>(ctx.space_l->with_components(2));
  ctx.space_m =
      (m == ell) ? ctx.space_l : std::make_shared<FESpace>(mesh, m, 1);
  const int order = 3 * ell + 2;
  ctx.tab_l = build_tables(*ctx.space_l, order, order);
  if (m != ell) ctx.tab_m_ = build_tables(*ctx.space_m, order, order);
  ctx.fc.resize(mesh.n_faces());
  for (int f = 0; f < mesh.n_faces(); ++f)
    ctx.fc[f] = face_coefficients(mesh, f, ctx.params, penalties, ell, m);
  return ctx;
}

namespace {

// C += A^T diag(w) B; scratch holds diag(w) B.
void add_product(RowMat& c, const RowMat& a, const double* w, const RowMat& b,
                 RowMat& scratch) {
  scratch.resize(b.rows(), b.cols());
  kernels::scale_rows(scratch.data(), b.data(), w, b.rows(), b.cols());
  kernels::gemm_tn_acc(c.data(), a.data(), scratch.data(), a.rows(), a.cols(),
                       b.cols());
}

void flush_square(const RowMat& loc, int row0, int col0, Triplets& out) {
  for (int i = 0; i < loc.rows(); ++i)
    for (int j = 0; j < loc.cols(); ++j)
      out.emplace_back(row0 + i, col0 + j, loc(i, j));
}

// eta = -c_f K grad(p_prev) at tableau points of one cell side.
void eta_at(const ElementParams& ep, const RowMat& dx, const RowMat& dy,
            const double* p_local, std::vector<double>& ex,
            std::vector<double>& ey) {
  const std::size_t nq = dx.rows();
  const int nl = static_cast<int>(dx.cols());
  ex.resize(nq);
  ey.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const Vec2 g{kernels::dot(dx.row(q).data(), p_local, nl),
                 kernels::dot(dy.row(q).data(), p_local, nl)};
    const Vec2 v = ep.K.apply(g) * (-ep.c_f);
    ex[q] = v.x;
    ey[q] = v.y;
  }
}

void values_at(const RowMat& phi, const double* local,
               std::vector<double>& out) {
  const std::size_t nq = phi.rows();
  const int nl = static_cast<int>(phi.cols());
  out.resize(nq);
  for (std::size_t q = 0; q < nq; ++q)
    out[q] = kernels::dot(phi.row(q).data(), local, nl);
}

// Shared WSIP assembly for the two scalar diffusion forms.
template <class TensorOf, class OmegaOf, class PenaltyOf>
ScalarBlock assemble_scalar_wsip(const AssemblyContext& ctx,
                                 TensorOf tensor_of, OmegaOf omega_of,
                                 PenaltyOf penalty_of, const ScalarFn* g) {
  const FESpace& sp = *ctx.space_l;
  const PolyMesh& mesh = *ctx.mesh;
  const int nl = sp.nloc();

  ScalarBlock out;
  out.rhs = Eigen::VectorXd::Zero(sp.n_scalar_dofs());
  out.trip.reserve(static_cast<std::size_t>(mesh.n_cells()) * nl * nl +
                   static_cast<std::size_t>(mesh.n_faces()) * 4 * nl * nl);

  RowMat loc, tx, ty, scratch;
  std::vector<double> wbuf;

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellTable& t = ctx.tab_l.cells[c];
    const Sym2 ten = tensor_of(ctx.params[c]);
    const std::size_t nq = t.rule.size();
    tx = ten.xx * t.dx + ten.xy * t.dy;
    ty = ten.xy * t.dx + ten.yy * t.dy;
    loc = RowMat::Zero(nl, nl);
    add_product(loc, t.dx, t.rule.weights.data(), tx, scratch);
    add_product(loc, t.dy, t.rule.weights.data(), ty, scratch);
    (void)nq;
    flush_square(loc, c * nl, c * nl, out.trip);
  }

  RowMat flux[2];
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    const FaceTable& ft = ctx.tab_l.faces[fi];
    const std::size_t nq = ft.rule.size();
    const double pen = penalty_of(ctx.fc[fi]);
    const int n_sides = f.is_boundary() ? 1 : 2;
    const int cell[2] = {f.owner, f.neighbor};
    const double sign[2] = {1.0, -1.0};
    double omega[2] = {1.0, 0.0};
    if (!f.is_boundary()) {
      const double* om = omega_of(ctx.fc[fi]);
      omega[0] = om[0];
      omega[1] = om[1];
    }
    for (int s = 0; s < n_sides; ++s) {
      const Sym2 ten = tensor_of(ctx.params[cell[s]]);
      const Vec2 tn = ten.apply(f.normal);
      flux[s] = tn.x * ft.side[s].dx + tn.y * ft.side[s].dy;
    }
    wbuf.resize(nq);
    for (int a = 0; a < n_sides; ++a) {
      for (int b = 0; b < n_sides; ++b) {
        loc = RowMat::Zero(nl, nl);
        // -[T-flux]{..}: -s_a phi_a^T w (omega_b flux_b)
        for (std::size_t q = 0; q < nq; ++q)
          wbuf[q] = -sign[a] * omega[b] * ft.rule.weights[q];
        add_product(loc, ft.side[a].phi, wbuf.data(), flux[b], scratch);
        // symmetrizing term: -omega_a flux_a^T w s_b phi_b
        for (std::size_t q = 0; q < nq; ++q)
          wbuf[q] = -omega[a] * sign[b] * ft.rule.weights[q];
        add_product(loc, flux[a], wbuf.data(), ft.side[b].phi, scratch);
        // penalty
        for (std::size_t q = 0; q < nq; ++q)
          wbuf[q] = pen * sign[a] * sign[b] * ft.rule.weights[q];
        add_product(loc, ft.side[a].phi, wbuf.data(), ft.side[b].phi, scratch);
        flush_square(loc, cell[a] * nl, cell[b] * nl, out.trip);
      }
    }
    if (f.is_boundary() && g) {
      double* rhs_local = out.rhs.data() + f.owner * nl;
      for (std::size_t q = 0; q < nq; ++q) {
        const double gv = (*g)(ft.rule.points[q]);
        const double w = ft.rule.weights[q];
        kernels::axpy(w * gv * pen, ft.side[0].phi.row(q).data(), rhs_local,
                      nl);
        kernels::axpy(-w * gv, flux[0].row(q).data(), rhs_local, nl);
      }
    }
  }
  return out;
}

}  // namespace

ScalarBlock assemble_AT(const AssemblyContext& ctx, const ScalarFn* g_T) {
  return assemble_scalar_wsip(
      ctx, [](const ElementParams& p) { return p.Theta; },
      [](const FaceCoefficients& fc) { return fc.omega_theta; },
      [](const FaceCoefficients& fc) { return fc.sigma; }, g_T);
}

ScalarBlock assemble_Ap(const AssemblyContext& ctx, const ScalarFn* g_p) {
  return assemble_scalar_wsip(
      ctx, [](const ElementParams& p) { return p.K; },
      [](const FaceCoefficients& fc) { return fc.omega_k; },
      [](const FaceCoefficients& fc) { return fc.xi; }, g_p);
}

VectorBlock assemble_Ae(const AssemblyContext& ctx, const VectorFn* g_u) {
  const FESpace& sp = *ctx.space_l;
  const PolyMesh& mesh = *ctx.mesh;
  const int nl = sp.nloc();
  const int nv = 2 * nl;

  VectorBlock out;
  out.rhs = Eigen::VectorXd::Zero(2 * sp.n_scalar_dofs());
  out.trip.reserve(static_cast<std::size_t>(mesh.n_cells()) * nv * nv +
                   static_cast<std::size_t>(mesh.n_faces()) * 4 * nv * nv);

  RowMat loc, scratch;
  std::vector<double> wbuf;

  auto udof = [nl](int c, int comp, int j) { return (c * 2 + comp) * nl + j; };

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellTable& t = ctx.tab_l.cells[c];
    const double mu = ctx.params[c].mu;
    const std::size_t nq = t.rule.size();
    wbuf.resize(nq);
    loc = RowMat::Zero(nv, nv);
    RowMat sub;
    auto add_sub = [&](int cc, int dd, const RowMat& A, const RowMat& B,
                       double factor) {
      sub = RowMat::Zero(nl, nl);
      std::vector<double> wf(nq);
      for (std::size_t q = 0; q < nq; ++q)
        wf[q] = factor * t.rule.weights[q];
      add_product(sub, A, wf.data(), B, scratch);
      loc.block(cc * nl, dd * nl, nl, nl) += sub;
    };
    // mu [delta_cd grad.grad + d_d phi_i d_c phi_j]
    add_sub(0, 0, t.dx, t.dx, 2.0 * mu);
    add_sub(0, 0, t.dy, t.dy, mu);
    add_sub(1, 1, t.dx, t.dx, mu);
    add_sub(1, 1, t.dy, t.dy, 2.0 * mu);
    add_sub(0, 1, t.dy, t.dx, mu);
    add_sub(1, 0, t.dx, t.dy, mu);
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        out.trip.emplace_back(udof(c, i / nl, i % nl),
                              udof(c, j / nl, j % nl), loc(i, j));
  }

  RowMat pn[2];  // grad(phi_j).n per side
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    const FaceTable& ft = ctx.tab_l.faces[fi];
    const std::size_t nq = ft.rule.size();
    const double zeta = ctx.fc[fi].zeta;
    const int n_sides = f.is_boundary() ? 1 : 2;
    const int cell[2] = {f.owner, f.neighbor};
    const double sign[2] = {1.0, -1.0};
    double omega[2] = {1.0, 0.0};
    if (!f.is_boundary()) {
      omega[0] = ctx.fc[fi].omega_mu[0];
      omega[1] = ctx.fc[fi].omega_mu[1];
    }
    const Vec2 n = f.normal;
    const double nc[2] = {n.x, n.y};
    for (int s = 0; s < n_sides; ++s)
      pn[s] = n.x * ft.side[s].dx + n.y * ft.side[s].dy;

    auto dmat = [&](int s, int comp) -> const RowMat& {
      return comp == 0 ? ft.side[s].dx : ft.side[s].dy;
    };
    // Flux tableau: F_s(c,d)[q,j] = mu_s (Pn delta_cd + n_d Dc)[q,j]
    auto flux = [&](int s, int cc, int dd, RowMat& out_mat) {
      const double mu = ctx.params[cell[s]].mu;
      if (cc == dd)
        out_mat = mu * (pn[s] + nc[dd] * dmat(s, cc));
      else
        out_mat = mu * nc[dd] * dmat(s, cc);
    };

    wbuf.resize(nq);
    RowMat fmat;
    for (int a = 0; a < n_sides; ++a) {
      for (int b = 0; b < n_sides; ++b) {
        loc = RowMat::Zero(nv, nv);
        for (int cc = 0; cc < 2; ++cc) {
          for (int dd = 0; dd < 2; ++dd) {
            RowMat sub = RowMat::Zero(nl, nl);
            // -{2 mu eps(u)}_omega : [v]
            flux(b, cc, dd, fmat);
            for (std::size_t q = 0; q < nq; ++q)
              wbuf[q] = -sign[a] * omega[b] * ft.rule.weights[q];
            add_product(sub, ft.side[a].phi, wbuf.data(), fmat, scratch);
            // -[u] : {2 mu eps(v)}_omega
            flux(a, dd, cc, fmat);
            for (std::size_t q = 0; q < nq; ++q)
              wbuf[q] = -omega[a] * sign[b] * ft.rule.weights[q];
            add_product(sub, fmat, wbuf.data(), ft.side[b].phi, scratch);
            // penalty (only diagonal in components)
            if (cc == dd) {
              for (std::size_t q = 0; q < nq; ++q)
                wbuf[q] = zeta * sign[a] * sign[b] * ft.rule.weights[q];
              add_product(sub, ft.side[a].phi, wbuf.data(), ft.side[b].phi,
                          scratch);
            }
            loc.block(cc * nl, dd * nl, nl, nl) += sub;
          }
        }
        for (int i = 0; i < nv; ++i)
          for (int j = 0; j < nv; ++j)
            out.trip.emplace_back(udof(cell[a], i / nl, i % nl),
                                  udof(cell[b], j / nl, j % nl), loc(i, j));
      }
    }
    if (f.is_boundary() && g_u) {
      const double mu = ctx.params[f.owner].mu;
      for (std::size_t q = 0; q < nq; ++q) {
        const Vec2 gv = (*g_u)(ft.rule.points[q]);
        const double w = ft.rule.weights[q];
        const double gcomp[2] = {gv.x, gv.y};
        for (int cc = 0; cc < 2; ++cc) {
          double* rhs_local = out.rhs.data() + udof(f.owner, cc, 0);
          kernels::axpy(w * zeta * gcomp[cc], ft.side[0].phi.row(q).data(),
                        rhs_local, nl);
          // - g . (2 mu eps(v) n) with v = phi_i e_c
          kernels::axpy(-w * mu * gcomp[cc], pn[0].row(q).data(), rhs_local,
                        nl);
          kernels::axpy(-w * mu * nc[cc] * gv.x, ft.side[0].dx.row(q).data(),
                        rhs_local, nl);
          kernels::axpy(-w * mu * nc[cc] * gv.y, ft.side[0].dy.row(q).data(),
                        rhs_local, nl);
        }
      }
    }
  }
  return out;
}

RectBlock assemble_B(const AssemblyContext& ctx, const VectorFn* g_u) {
  const PolyMesh& mesh = *ctx.mesh;
  const int nl = ctx.space_l->nloc();
  const int nm = ctx.space_m->nloc();

  RectBlock out;
  out.rhs_phi = Eigen::VectorXd::Zero(ctx.space_m->n_scalar_dofs());
  out.trip.reserve(static_cast<std::size_t>(mesh.n_cells()) * 2 * nl * nm +
                   static_cast<std::size_t>(mesh.n_faces()) * 8 * nl * nm);

  auto udof = [nl](int c, int comp, int j) { return (c * 2 + comp) * nl + j; };
  RowMat loc, scratch;
  std::vector<double> wbuf;

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellTable& tl = ctx.tab_l.cells[c];
    const CellTable& tm = ctx.tabm().cells[c];
    const std::size_t nq = tl.rule.size();
    wbuf.resize(nq);
    for (std::size_t q = 0; q < nq; ++q) wbuf[q] = -tl.rule.weights[q];
    for (int comp = 0; comp < 2; ++comp) {
      loc = RowMat::Zero(nl, nm);
      add_product(loc, comp == 0 ? tl.dx : tl.dy, wbuf.data(), tm.phi,
                  scratch);
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nm; ++j)
          out.trip.emplace_back(udof(c, comp, i), c * nm + j, loc(i, j));
    }
  }

  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    const FaceTable& fl = ctx.tab_l.faces[fi];
    const FaceTable& fm = ctx.tabm().faces[fi];
    const std::size_t nq = fl.rule.size();
    const Vec2 n = f.normal;
    const double nc[2] = {n.x, n.y};
    wbuf.resize(nq);
    if (f.is_boundary()) {
      for (int comp = 0; comp < 2; ++comp) {
        for (std::size_t q = 0; q < nq; ++q)
          wbuf[q] = nc[comp] * fl.rule.weights[q];
        loc = RowMat::Zero(nl, nm);
        add_product(loc, fl.side[0].phi, wbuf.data(), fm.side[0].phi, scratch);
        for (int i = 0; i < nl; ++i)
          for (int j = 0; j < nm; ++j)
            out.trip.emplace_back(udof(f.owner, comp, i), f.owner * nm + j,
                                  loc(i, j));
      }
      if (g_u) {
        double* rhs_local = out.rhs_phi.data() + f.owner * nm;
        for (std::size_t q = 0; q < nq; ++q) {
          const Vec2 gv = (*g_u)(fl.rule.points[q]);
          kernels::axpy(fl.rule.weights[q] * gv.dot(n),
                        fm.side[0].phi.row(q).data(), rhs_local, nm);
        }
      }
    } else {
      const int cell[2] = {f.owner, f.neighbor};
      const double sign[2] = {1.0, -1.0};
      for (int a = 0; a < 2; ++a) {    // u side
        for (int b = 0; b < 2; ++b) {  // phi side ({phi} average)
          for (int comp = 0; comp < 2; ++comp) {
            for (std::size_t q = 0; q < nq; ++q)
              wbuf[q] = 0.5 * sign[a] * nc[comp] * fl.rule.weights[q];
            loc = RowMat::Zero(nl, nm);
            add_product(loc, fl.side[a].phi, wbuf.data(), fm.side[b].phi,
                        scratch);
            for (int i = 0; i < nl; ++i)
              for (int j = 0; j < nm; ++j)
                out.trip.emplace_back(udof(cell[a], comp, i),
                                      cell[b] * nm + j, loc(i, j));
          }
        }
      }
    }
  }
  return out;
}

Triplets assemble_D(const AssemblyContext& ctx) {
  const PolyMesh& mesh = *ctx.mesh;
  const int nm = ctx.space_m->nloc();
  Triplets trip;
  RowMat loc, scratch;
  std::vector<double> wbuf;
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (f.is_boundary()) continue;
    const FaceTable& ft = ctx.tabm().faces[fi];
    const std::size_t nq = ft.rule.size();
    const double rho = ctx.fc[fi].rho;
    const int cell[2] = {f.owner, f.neighbor};
    const double sign[2] = {1.0, -1.0};
    wbuf.resize(nq);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (std::size_t q = 0; q < nq; ++q)
          wbuf[q] = rho * sign[a] * sign[b] * ft.rule.weights[q];
        loc = RowMat::Zero(nm, nm);
        add_product(loc, ft.side[a].phi, wbuf.data(), ft.side[b].phi, scratch);
        flush_square(loc, cell[a] * nm, cell[b] * nm, trip);
      }
    }
  }
  return trip;
}

Triplets assemble_M(const AssemblyContext& ctx) {
  const PolyMesh& mesh = *ctx.mesh;
  const int nl = ctx.space_l->nloc();
  const int nm = ctx.space_m->nloc();
  const int np = nl * mesh.n_cells();

  Triplets trip;
  RowMat mll, mmm, mml, scratch, loc;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const ElementParams& ep = ctx.params[c];
    const CellTable& tl = ctx.tab_l.cells[c];
    const CellTable& tm = ctx.tabm().cells[c];
    const std::size_t nq = tl.rule.size();
    mll = RowMat::Zero(nl, nl);
    add_product(mll, tl.phi, tl.rule.weights.data(), tl.phi, scratch);
    mmm = RowMat::Zero(nm, nm);
    add_product(mmm, tm.phi, tl.rule.weights.data(), tm.phi, scratch);
    mml = RowMat::Zero(nm, nl);
    add_product(mml, tm.phi, tl.rule.weights.data(), tl.phi, scratch);
    (void)nq;

    const double inv_l = 1.0 / ep.lambda;
    const double cpp = ep.c0 + ep.alpha * ep.alpha * inv_l;
    const double cTT = ep.a0 + ep.beta * ep.beta * inv_l;
    const double cpT = -ep.b0 + ep.alpha * ep.beta * inv_l;
    const double cphiphi = inv_l;
    const double cphip = ep.alpha * inv_l;
    const double cphiT = ep.beta * inv_l;

    auto emit = [&trip](const RowMat& m, double coef, int r0, int c0) {
      for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
          trip.emplace_back(r0 + i, c0 + j, coef * m(i, j));
    };
    const int p0 = c * nl;
    const int T0 = np + c * nl;
    const int f0 = 2 * np + c * nm;
    emit(mll, cpp, p0, p0);
    emit(mll, cTT, T0, T0);
    emit(mll, cpT, p0, T0);
    emit(mll, cpT, T0, p0);
    emit(mmm, cphiphi, f0, f0);
    emit(mml, cphip, f0, p0);
    emit(mml, cphiT, f0, T0);
    loc = mml.transpose();
    emit(loc, cphip, p0, f0);
    emit(loc, cphiT, T0, f0);
  }
  return trip;
}

Triplets assemble_upwind(const AssemblyContext& ctx,
                         const Eigen::VectorXd& p_prev) {
  const PolyMesh& mesh = *ctx.mesh;
  const int nl = ctx.space_l->nloc();
  const double varpi = ctx.penalties.upwind_scale;
  Triplets trip;
  RowMat loc, scratch;
  std::vector<double> wbuf, ex0, ey0, ex1, ey1;
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (f.is_boundary() && !ctx.penalties.upwind_all_faces) continue;
    const FaceTable& ft = ctx.tab_l.faces[fi];
    const std::size_t nq = ft.rule.size();
    const Vec2 n = f.normal;
    eta_at(ctx.params[f.owner], ft.side[0].dx, ft.side[0].dy,
           p_prev.data() + f.owner * nl, ex0, ey0);
    wbuf.resize(nq);
    if (f.is_boundary()) {
      for (std::size_t q = 0; q < nq; ++q)
        wbuf[q] = 0.5 * varpi * std::abs(ex0[q] * n.x + ey0[q] * n.y) *
                  ft.rule.weights[q];
      loc = RowMat::Zero(nl, nl);
      add_product(loc, ft.side[0].phi, wbuf.data(), ft.side[0].phi, scratch);
      flush_square(loc, f.owner * nl, f.owner * nl, trip);
      continue;
    }
    eta_at(ctx.params[f.neighbor], ft.side[1].dx, ft.side[1].dy,
           p_prev.data() + f.neighbor * nl, ex1, ey1);
    const int cell[2] = {f.owner, f.neighbor};
    const double sign[2] = {1.0, -1.0};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (std::size_t q = 0; q < nq; ++q) {
          const double avg_n =
              0.5 * ((ex0[q] + ex1[q]) * n.x + (ey0[q] + ey1[q]) * n.y);
          wbuf[q] = 0.5 * varpi * std::abs(avg_n) * sign[a] * sign[b] *
                    ft.rule.weights[q];
        }
        loc = RowMat::Zero(nl, nl);
        add_product(loc, ft.side[a].phi, wbuf.data(), ft.side[b].phi, scratch);
        flush_square(loc, cell[a] * nl, cell[b] * nl, trip);
      }
    }
  }
  return trip;
}

ScalarBlock assemble_inflow(const AssemblyContext& ctx,
                            const Eigen::VectorXd& p_prev,
                            const ScalarFn* g_T) {
  const PolyMesh& mesh = *ctx.mesh;
  const int nl = ctx.space_l->nloc();
  ScalarBlock out;
  out.rhs = Eigen::VectorXd::Zero(ctx.space_l->n_scalar_dofs());
  RowMat loc, scratch;
  std::vector<double> wbuf, ex, ey;
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (!f.is_boundary()) continue;
    const FaceTable& ft = ctx.tab_l.faces[fi];
    const std::size_t nq = ft.rule.size();
    const Vec2 n = f.normal;
    eta_at(ctx.params[f.owner], ft.side[0].dx, ft.side[0].dy,
           p_prev.data() + f.owner * nl, ex, ey);
    wbuf.resize(nq);
    for (std::size_t q = 0; q < nq; ++q) {
      const double en = ex[q] * n.x + ey[q] * n.y;
      const double coef = ctx.penalties.upwind_all_faces
                              ? -0.5 * en  // Eq.(13)-style boundary handling
                              : negative_part(en);
      wbuf[q] = coef * ft.rule.weights[q];
    }
    loc = RowMat::Zero(nl, nl);
    add_product(loc, ft.side[0].phi, wbuf.data(), ft.side[0].phi, scratch);
    flush_square(loc, f.owner * nl, f.owner * nl, out.trip);
    if (g_T) {
      double* rhs_local = out.rhs.data() + f.owner * nl;
      for (std::size_t q = 0; q < nq; ++q) {
        const double en = ex[q] * n.x + ey[q] * n.y;
        kernels::axpy(negative_part(en) * ft.rule.weights[q] *
                          (*g_T)(ft.rule.points[q]),
                      ft.side[0].phi.row(q).data(), rhs_local, nl);
      }
    }
  }
  return out;
}

CBlock assemble_C(const AssemblyContext& ctx, TransportVariant variant,
                  const TransportState& state, const ScalarFn* g_T) {
  const PolyMesh& mesh = *ctx.mesh;
  const int nl = ctx.space_l->nloc();

  if (variant == TransportVariant::old_scheme) {
    if (!state.T_prev)
      throw std::invalid_argument(
          "assemble_C(old): previous temperature iterate required");
  } else if (!state.p_prev) {
    throw std::invalid_argument(
        "assemble_C: previous pressure iterate required");
  }

  CBlock out;
  out.rhs = Eigen::VectorXd::Zero(ctx.space_l->n_scalar_dofs());
  out.couples_pressure = (variant == TransportVariant::old_scheme);

  RowMat loc, sgrad, scratch;
  std::vector<double> wbuf, ex0, ey0, ex1, ey1;

  // Volume term.
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellTable& t = ctx.tab_l.cells[c];
    const ElementParams& ep = ctx.params[c];
    const std::size_t nq = t.rule.size();
    loc = RowMat::Zero(nl, nl);
    sgrad.resize(nq, nl);
    if (variant == TransportVariant::old_scheme) {
      // (-c_f (K grad p^m) . grad T^{m-1}, S): trial columns are p dofs.
      const double* T_local = state.T_prev->data() + c * nl;
      for (std::size_t q = 0; q < nq; ++q) {
        const Vec2 gT{kernels::dot(t.dx.row(q).data(), T_local, nl),
                      kernels::dot(t.dy.row(q).data(), T_local, nl)};
        const Vec2 v = ep.K.apply(gT) * (-ep.c_f);  // K symmetric
        sgrad.row(q) = v.x * t.dx.row(q) + v.y * t.dy.row(q);
      }
    } else {
      eta_at(ep, t.dx, t.dy, state.p_prev->data() + c * nl, ex0, ey0);
      for (std::size_t q = 0; q < nq; ++q)
        sgrad.row(q) = ex0[q] * t.dx.row(q) + ey0[q] * t.dy.row(q);
    }
    add_product(loc, t.phi, t.rule.weights.data(), sgrad, scratch);
    flush_square(loc, c * nl, c * nl, out.trip);
  }

  if (variant == TransportVariant::old_scheme ||
      variant == TransportVariant::vol)
    return out;

  // Interior-face consistency term: -({eta}.[T]) {S}.
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (f.is_boundary()) continue;
    const FaceTable& ft = ctx.tab_l.faces[fi];
    const std::size_t nq = ft.rule.size();
    const Vec2 n = f.normal;
    eta_at(ctx.params[f.owner], ft.side[0].dx, ft.side[0].dy,
           state.p_prev->data() + f.owner * nl, ex0, ey0);
    eta_at(ctx.params[f.neighbor], ft.side[1].dx, ft.side[1].dy,
           state.p_prev->data() + f.neighbor * nl, ex1, ey1);
    const int cell[2] = {f.owner, f.neighbor};
    const double sign[2] = {1.0, -1.0};
    wbuf.resize(nq);
    for (int a = 0; a < 2; ++a) {    // test {S}
      for (int b = 0; b < 2; ++b) {  // trial [T]
        for (std::size_t q = 0; q < nq; ++q) {
          const double avg_n =
              0.5 * ((ex0[q] + ex1[q]) * n.x + (ey0[q] + ey1[q]) * n.y);
          wbuf[q] = -0.5 * sign[b] * avg_n * ft.rule.weights[q];
        }
        loc = RowMat::Zero(nl, nl);
        add_product(loc, ft.side[a].phi, wbuf.data(), ft.side[b].phi, scratch);
        flush_square(loc, cell[a] * nl, cell[b] * nl, out.trip);
      }
    }
  }

  if (variant == TransportVariant::plain) return out;

  Triplets uw = assemble_upwind(ctx, *state.p_prev);
  out.trip.insert(out.trip.end(), uw.begin(), uw.end());
  ScalarBlock inflow = assemble_inflow(ctx, *state.p_prev, g_T);
  out.trip.insert(out.trip.end(), inflow.trip.begin(), inflow.trip.end());
  out.rhs += inflow.rhs;
  return out;
}

SourceVectors assemble_sources(const AssemblyContext& ctx, const VectorFn& f,
                               const ScalarFn& g, const ScalarFn& H) {
  const PolyMesh& mesh = *ctx.mesh;
  const int nl = ctx.space_l->nloc();
  SourceVectors out;
  out.u = Eigen::VectorXd::Zero(2 * ctx.space_l->n_scalar_dofs());
  out.p = Eigen::VectorXd::Zero(ctx.space_l->n_scalar_dofs());
  out.T = Eigen::VectorXd::Zero(ctx.space_l->n_scalar_dofs());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellTable& t = ctx.tab_l.cells[c];
    for (std::size_t q = 0; q < t.rule.size(); ++q) {
      const Vec2 x = t.rule.points[q];
      const double w = t.rule.weights[q];
      const Vec2 fv = f(x);
      kernels::axpy(w * fv.x, t.phi.row(q).data(),
                    out.u.data() + (c * 2 + 0) * nl, nl);
      kernels::axpy(w * fv.y, t.phi.row(q).data(),
                    out.u.data() + (c * 2 + 1) * nl, nl);
      kernels::axpy(w * g(x), t.phi.row(q).data(), out.p.data() + c * nl, nl);
      kernels::axpy(w * H(x), t.phi.row(q).data(), out.T.data() + c * nl, nl);
    }
  }
  return out;
}

SpMat matrix_from(const Triplets& trip, int rows, int cols) {
  SpMat m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

namespace {

struct FaceFieldValues {
  std::vector<double> T[2], S[2], ex[2], ey[2];
};

void face_fields(const AssemblyContext& ctx, int fi, const Eigen::VectorXd& T,
                 const Eigen::VectorXd& p, const Eigen::VectorXd& S,
                 FaceFieldValues& v) {
  const Face& f = ctx.mesh->faces[fi];
  const FaceTable& ft = ctx.tab_l.faces[fi];
  const int nl = ctx.space_l->nloc();
  const int n_sides = f.is_boundary() ? 1 : 2;
  const int cell[2] = {f.owner, f.neighbor};
  for (int s = 0; s < n_sides; ++s) {
    values_at(ft.side[s].phi, T.data() + cell[s] * nl, v.T[s]);
    values_at(ft.side[s].phi, S.data() + cell[s] * nl, v.S[s]);
    eta_at(ctx.params[cell[s]], ft.side[s].dx, ft.side[s].dy,
           p.data() + cell[s] * nl, v.ex[s], v.ey[s]);
  }
}

}  // namespace

double form_value_Cvol(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                       const Eigen::VectorXd& p, const Eigen::VectorXd& S) {
  const int nl = ctx.space_l->nloc();
  double total = 0.0;
  std::vector<double> ex, ey, sv;
  for (int c = 0; c < ctx.mesh->n_cells(); ++c) {
    const CellTable& t = ctx.tab_l.cells[c];
    eta_at(ctx.params[c], t.dx, t.dy, p.data() + c * nl, ex, ey);
    values_at(t.phi, S.data() + c * nl, sv);
    const double* T_local = T.data() + c * nl;
    for (std::size_t q = 0; q < t.rule.size(); ++q) {
      const Vec2 gT{kernels::dot(t.dx.row(q).data(), T_local, nl),
                    kernels::dot(t.dy.row(q).data(), T_local, nl)};
      total += t.rule.weights[q] * (ex[q] * gT.x + ey[q] * gT.y) * sv[q];
    }
  }
  return total;
}

double form_value_Ctilde(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                         const Eigen::VectorXd& p, const Eigen::VectorXd& S) {
  double total = form_value_Cvol(ctx, T, p, S);
  FaceFieldValues v;
  for (int fi = 0; fi < ctx.mesh->n_faces(); ++fi) {
    const Face& f = ctx.mesh->faces[fi];
    if (f.is_boundary()) continue;
    const FaceTable& ft = ctx.tab_l.faces[fi];
    face_fields(ctx, fi, T, p, S, v);
    const Vec2 n = f.normal;
    for (std::size_t q = 0; q < ft.rule.size(); ++q) {
      const double avg_n = 0.5 * ((v.ex[0][q] + v.ex[1][q]) * n.x +
                                  (v.ey[0][q] + v.ey[1][q]) * n.y);
      total -= ft.rule.weights[q] * avg_n * (v.T[0][q] - v.T[1][q]) * 0.5 *
               (v.S[0][q] + v.S[1][q]);
    }
  }
  return total;
}

double form_value_suw(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                      const Eigen::VectorXd& p, const Eigen::VectorXd& S) {
  double total = 0.0;
  FaceFieldValues v;
  const double varpi = ctx.penalties.upwind_scale;
  for (int fi = 0; fi < ctx.mesh->n_faces(); ++fi) {
    const Face& f = ctx.mesh->faces[fi];
    if (f.is_boundary() && !ctx.penalties.upwind_all_faces) continue;
    const FaceTable& ft = ctx.tab_l.faces[fi];
    face_fields(ctx, fi, T, p, S, v);
    const Vec2 n = f.normal;
    for (std::size_t q = 0; q < ft.rule.size(); ++q) {
      double avg_n, jt, js;
      if (f.is_boundary()) {
        avg_n = v.ex[0][q] * n.x + v.ey[0][q] * n.y;
        jt = v.T[0][q];
        js = v.S[0][q];
      } else {
        avg_n = 0.5 * ((v.ex[0][q] + v.ex[1][q]) * n.x +
                       (v.ey[0][q] + v.ey[1][q]) * n.y);
        jt = v.T[0][q] - v.T[1][q];
        js = v.S[0][q] - v.S[1][q];
      }
      total += ft.rule.weights[q] * 0.5 * varpi * std::abs(avg_n) * jt * js;
    }
  }
  return total;
}

double form_value_sinflow(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                          const Eigen::VectorXd& p, const Eigen::VectorXd& S) {
  double total = 0.0;
  FaceFieldValues v;
  for (int fi = 0; fi < ctx.mesh->n_faces(); ++fi) {
    const Face& f = ctx.mesh->faces[fi];
    if (!f.is_boundary()) continue;
    const FaceTable& ft = ctx.tab_l.faces[fi];
    face_fields(ctx, fi, T, p, S, v);
    const Vec2 n = f.normal;
    for (std::size_t q = 0; q < ft.rule.size(); ++q) {
      const double en = v.ex[0][q] * n.x + v.ey[0][q] * n.y;
      const double coef = ctx.penalties.upwind_all_faces
                              ? -0.5 * en
                              : negative_part(en);
      total += ft.rule.weights[q] * coef * v.T[0][q] * v.S[0][q];
    }
  }
  return total;
}

double form_value_Cstab(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                        const Eigen::VectorXd& p, const Eigen::VectorXd& S) {
  return form_value_Ctilde(ctx, T, p, S) + form_value_suw(ctx, T, p, S) +
         form_value_sinflow(ctx, T, p, S);
}

double form_value_B_Tsq_eta(const AssemblyContext& ctx,
                            const Eigen::VectorXd& T,
                            const Eigen::VectorXd& p) {
  const int nl = ctx.space_l->nloc();
  double total = 0.0;
  // Volume: -(T^2, div eta); div eta = -c_f K : Hess(p).
  RowMat hxx, hxy, hyy;
  std::vector<double> tv;
  for (int c = 0; c < ctx.mesh->n_cells(); ++c) {
    const CellTable& t = ctx.tab_l.cells[c];
    ctx.space_l->basis_seconds(c, t.rule.points, hxx, hxy, hyy);
    values_at(t.phi, T.data() + c * nl, tv);
    const ElementParams& ep = ctx.params[c];
    const double* p_local = p.data() + c * nl;
    for (std::size_t q = 0; q < t.rule.size(); ++q) {
      const double pxx = kernels::dot(hxx.row(q).data(), p_local, nl);
      const double pxy = kernels::dot(hxy.row(q).data(), p_local, nl);
      const double pyy = kernels::dot(hyy.row(q).data(), p_local, nl);
      const double div_eta =
          -ep.c_f * (ep.K.xx * pxx + 2.0 * ep.K.xy * pxy + ep.K.yy * pyy);
      total -= t.rule.weights[q] * tv[q] * tv[q] * div_eta;
    }
  }
  // Faces: + sum_F {T^2} [[eta]]_n.
  FaceFieldValues v;
  for (int fi = 0; fi < ctx.mesh->n_faces(); ++fi) {
    const Face& f = ctx.mesh->faces[fi];
    const FaceTable& ft = ctx.tab_l.faces[fi];
    face_fields(ctx, fi, T, p, T, v);
    const Vec2 n = f.normal;
    for (std::size_t q = 0; q < ft.rule.size(); ++q) {
      double jump_n, avg_t2;
      if (f.is_boundary()) {
        jump_n = v.ex[0][q] * n.x + v.ey[0][q] * n.y;
        avg_t2 = v.T[0][q] * v.T[0][q];
      } else {
        jump_n = (v.ex[0][q] - v.ex[1][q]) * n.x +
                 (v.ey[0][q] - v.ey[1][q]) * n.y;
        avg_t2 = 0.5 * (v.T[0][q] * v.T[0][q] + v.T[1][q] * v.T[1][q]);
      }
      total += ft.rule.weights[q] * avg_t2 * jump_n;
    }
  }
  return total;
}

double prop33_rhs(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                  const Eigen::VectorXd& p) {
  return 0.5 * form_value_B_Tsq_eta(ctx, T, p);
}

double prop36_rhs(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                  const Eigen::VectorXd& p) {
  return 0.5 * form_value_B_Tsq_eta(ctx, T, p) +
         form_value_suw(ctx, T, p, T) + form_value_sinflow(ctx, T, p, T);
}

}  // namespace thm
