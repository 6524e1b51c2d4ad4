#include "thm/mms.hpp"

#include <cmath>
#include <stdexcept>

#include "thm/kernels.hpp"

namespace thm {

Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.v + b.v,   a.dx + b.dx,   a.dy + b.dy,
          a.dxx + b.dxx, a.dxy + b.dxy, a.dyy + b.dyy};
}

Jet2 operator-(const Jet2& a, const Jet2& b) {
  return {a.v - b.v,   a.dx - b.dx,   a.dy - b.dy,
          a.dxx - b.dxx, a.dxy - b.dxy, a.dyy - b.dyy};
}

Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.v = a.v * b.v;
  r.dx = a.dx * b.v + a.v * b.dx;
  r.dy = a.dy * b.v + a.v * b.dy;
  r.dxx = a.dxx * b.v + 2.0 * a.dx * b.dx + a.v * b.dxx;
  r.dxy = a.dxy * b.v + a.dx * b.dy + a.dy * b.dx + a.v * b.dxy;
  r.dyy = a.dyy * b.v + 2.0 * a.dy * b.dy + a.v * b.dyy;
  return r;
}

Jet2 operator*(double s, const Jet2& a) {
  return {s * a.v, s * a.dx, s * a.dy, s * a.dxx, s * a.dxy, s * a.dyy};
}

Jet2 operator-(const Jet2& a) { return -1.0 * a; }

namespace {

Jet2 chain(const Jet2& a, double f, double fp, double fpp) {
  Jet2 r;
  r.v = f;
  r.dx = fp * a.dx;
  r.dy = fp * a.dy;
  r.dxx = fpp * a.dx * a.dx + fp * a.dxx;
  r.dxy = fpp * a.dx * a.dy + fp * a.dxy;
  r.dyy = fpp * a.dy * a.dy + fp * a.dyy;
  return r;
}

}  // namespace

Jet2 sin(const Jet2& a) {
  return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v));
}

Jet2 cos(const Jet2& a) {
  return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v));
}

CaseFields ManufacturedCase::fields(Vec2 pt) const {
  const Jet2 x = Jet2::var_x(pt.x);
  const Jet2 y = Jet2::var_y(pt.y);
  CaseFields f;
  switch (kind) {
    case CaseKind::trig:
    case CaseKind::trig_mirrored: {
      const Jet2 ux = x * x * cos(0.5 * M_PI * x) * sin(M_PI * x);
      f.u1 = nu_u * ux;
      if (kind == CaseKind::trig) {
        f.u2 = f.u1;
      } else {
        f.u2 = nu_u * (y * y * cos(0.5 * M_PI * y) * sin(M_PI * y));
      }
      f.p = nu_p * (x * x * sin(M_PI * x) * sin(M_PI * y));
      f.T = -1.0 * nu_T * (y * y * sin(M_PI * x) * sin(M_PI * y));
      break;
    }
    case CaseKind::poly_linear: {
      f.u1 = nu_u * (2.0 * x + y);
      f.u2 = nu_u * (x - y);
      f.p = nu_p * (x + y);
      f.T = nu_T * (x - 2.0 * y);
      break;
    }
    case CaseKind::poly_quadratic: {
      f.u1 = nu_u * (x * x);
      f.u2 = nu_u * (x * y);
      f.p = nu_p * (x + y);
      f.T = nu_T * (x - y);
      break;
    }
  }
  return f;
}

ExactState exact_eval(const ManufacturedCase& c, const ElementParams& ep,
                      Vec2 x) {
  const CaseFields f = c.fields(x);
  ExactState s;
  s.u = {f.u1.v, f.u2.v};
  s.p = f.p.v;
  s.T = f.T.v;
  const double div_u = f.u1.dx + f.u2.dy;
  s.phi = ep.lambda * div_u - ep.alpha * s.p - ep.beta * s.T;
  return s;
}

PointForcing derive_forcings(const ManufacturedCase& c,
                             const ElementParams& ep, Vec2 x) {
  const CaseFields f = c.fields(x);
  PointForcing out;

  const double div_u = f.u1.dx + f.u2.dy;
  const double ddivu_dx = f.u1.dxx + f.u2.dxy;
  const double ddivu_dy = f.u1.dxy + f.u2.dyy;

  const Sym2& K = ep.K;
  const Sym2& Th = ep.Theta;
  const double div_K_grad_p =
      K.xx * f.p.dxx + 2.0 * K.xy * f.p.dxy + K.yy * f.p.dyy;
  const double div_Th_grad_T =
      Th.xx * f.T.dxx + 2.0 * Th.xy * f.T.dxy + Th.yy * f.T.dyy;
  const Vec2 Kgp = K.apply({f.p.dx, f.p.dy});
  const double gradT_K_gradp = f.T.dx * Kgp.x + f.T.dy * Kgp.y;

  out.H = ep.a0 * f.T.v - ep.b0 * f.p.v + ep.beta * div_u -
          ep.c_f * gradT_K_gradp - div_Th_grad_T;
  out.g = ep.c0 * f.p.v - ep.b0 * f.T.v + ep.alpha * div_u - div_K_grad_p;

  const double lap_u1 = f.u1.dxx + f.u1.dyy;
  const double lap_u2 = f.u2.dxx + f.u2.dyy;
  out.f = {-ep.mu * (lap_u1 + ddivu_dx) - ep.lambda * ddivu_dx +
               ep.alpha * f.p.dx + ep.beta * f.T.dx,
           -ep.mu * (lap_u2 + ddivu_dy) - ep.lambda * ddivu_dy +
               ep.alpha * f.p.dy + ep.beta * f.T.dy};
  return out;
}

DirichletData dirichlet_from(const ManufacturedCase& c) {
  DirichletData bc;
  bc.g_u = [c](Vec2 x) {
    const CaseFields f = c.fields(x);
    return Vec2{f.u1.v, f.u2.v};
  };
  bc.g_p = [c](Vec2 x) { return c.fields(x).p.v; };
  bc.g_T = [c](Vec2 x) { return c.fields(x).T.v; };
  return bc;
}

Sources sources_from(const ManufacturedCase& c, const ElementParams& ep) {
  Sources s;
  s.f = [c, ep](Vec2 x) { return derive_forcings(c, ep, x).f; };
  s.g = [c, ep](Vec2 x) { return derive_forcings(c, ep, x).g; };
  s.H = [c, ep](Vec2 x) { return derive_forcings(c, ep, x).H; };
  return s;
}

ErrorReport error_norms(const Eigen::VectorXd& x, const ManufacturedCase& c,
                        const AssemblyContext& ctx) {
  const PolyMesh& mesh = *ctx.mesh;
  const FESpace& spl = *ctx.space_l;
  const FESpace& spm = *ctx.space_m;
  const BlockLayout layout = ctx.layout();
  const int nl = spl.nloc();
  const int nm = spm.nloc();
  const int order = 2 * ctx.ell + 4;

  ErrorReport rep;
  rep.h = mesh.max_h();

  RowMat phi_l, dx_l, dy_l, phi_m, dxm, dym;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const ElementParams& ep = ctx.params[cell];
    const QuadratureRule rule = polygon_rule(mesh.cell_points(cell), order);
    spl.basis_all(cell, rule.points, phi_l, dx_l, dy_l);
    spm.basis_values(cell, rule.points, phi_m);
    const double* pu0 = x.data() + layout.u_dof(cell, 0, 0);
    const double* pu1 = x.data() + layout.u_dof(cell, 1, 0);
    const double* pp = x.data() + layout.p_dof(cell, 0);
    const double* pT = x.data() + layout.T_dof(cell, 0);
    const double* pphi = x.data() + layout.phi_dof(cell, 0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q];
      const CaseFields ex = c.fields(rule.points[q]);
      const double div_u_ex = ex.u1.dx + ex.u2.dy;
      const double phi_ex =
          ep.lambda * div_u_ex - ep.alpha * ex.p.v - ep.beta * ex.T.v;

      const double* pr = phi_l.row(q).data();
      const double* dxr = dx_l.row(q).data();
      const double* dyr = dy_l.row(q).data();

      const double eu1 = kernels::dot(pr, pu0, nl) - ex.u1.v;
      const double eu2 = kernels::dot(pr, pu1, nl) - ex.u2.v;
      rep.u_L2 += w * (eu1 * eu1 + eu2 * eu2);

      const double exx = kernels::dot(dxr, pu0, nl) - ex.u1.dx;
      const double eyy = kernels::dot(dyr, pu1, nl) - ex.u2.dy;
      const double exy = 0.5 * (kernels::dot(dyr, pu0, nl) - ex.u1.dy +
                                kernels::dot(dxr, pu1, nl) - ex.u2.dx);
      rep.u_dG += w * 2.0 * ep.mu * (exx * exx + 2.0 * exy * exy + eyy * eyy);

      const double epv = kernels::dot(pr, pp, nl) - ex.p.v;
      rep.p_L2 += w * epv * epv;
      const Vec2 gp{kernels::dot(dxr, pp, nl) - ex.p.dx,
                    kernels::dot(dyr, pp, nl) - ex.p.dy};
      rep.p_dG += w * gp.dot(ep.K.apply(gp));

      const double eT = kernels::dot(pr, pT, nl) - ex.T.v;
      rep.T_L2 += w * eT * eT;
      const Vec2 gT{kernels::dot(dxr, pT, nl) - ex.T.dx,
                    kernels::dot(dyr, pT, nl) - ex.T.dy};
      rep.T_dG += w * gT.dot(ep.Theta.apply(gT));

      const double ephi = kernels::dot(phi_m.row(q).data(), pphi, nm) - phi_ex;
      rep.phi_L2 += w * ephi * ephi;
    }
  }

  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    const QuadratureRule rule =
        segment_rule(mesh.vertices[f.v0], mesh.vertices[f.v1], order);
    const FaceCoefficients& fc = ctx.fc[fi];
    RowMat phi_o, phi_n, du, dv;
    spl.basis_values(f.owner, rule.points, phi_o);
    if (!f.is_boundary()) spl.basis_values(f.neighbor, rule.points, phi_n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q];
      const double* po = phi_o.row(q).data();
      double jp, jT, ju1, ju2;
      if (f.is_boundary()) {
        const CaseFields ex = c.fields(rule.points[q]);
        jp = kernels::dot(po, x.data() + layout.p_dof(f.owner, 0), nl) -
             ex.p.v;
        jT = kernels::dot(po, x.data() + layout.T_dof(f.owner, 0), nl) -
             ex.T.v;
        ju1 = kernels::dot(po, x.data() + layout.u_dof(f.owner, 0, 0), nl) -
              ex.u1.v;
        ju2 = kernels::dot(po, x.data() + layout.u_dof(f.owner, 1, 0), nl) -
              ex.u2.v;
      } else {
        const double* pn = phi_n.row(q).data();
        jp = kernels::dot(po, x.data() + layout.p_dof(f.owner, 0), nl) -
             kernels::dot(pn, x.data() + layout.p_dof(f.neighbor, 0), nl);
        jT = kernels::dot(po, x.data() + layout.T_dof(f.owner, 0), nl) -
             kernels::dot(pn, x.data() + layout.T_dof(f.neighbor, 0), nl);
        ju1 = kernels::dot(po, x.data() + layout.u_dof(f.owner, 0, 0), nl) -
              kernels::dot(pn, x.data() + layout.u_dof(f.neighbor, 0, 0), nl);
        ju2 = kernels::dot(po, x.data() + layout.u_dof(f.owner, 1, 0), nl) -
              kernels::dot(pn, x.data() + layout.u_dof(f.neighbor, 1, 0), nl);
      }
      rep.p_dG += w * fc.xi * jp * jp;
      rep.T_dG += w * fc.sigma * jT * jT;
      rep.u_dG += w * fc.zeta * (ju1 * ju1 + ju2 * ju2);
    }
  }

  rep.u_L2 = std::sqrt(rep.u_L2);
  rep.u_dG = std::sqrt(rep.u_dG);
  rep.p_L2 = std::sqrt(rep.p_L2);
  rep.p_dG = std::sqrt(rep.p_dG);
  rep.T_L2 = std::sqrt(rep.T_L2);
  rep.T_dG = std::sqrt(rep.T_dG);
  rep.phi_L2 = std::sqrt(rep.phi_L2);
  return rep;
}

double observed_order(std::span<const double> errors,
                      std::span<const double> hs) {
  if (errors.size() != hs.size() || errors.size() < 2)
    throw std::invalid_argument("observed_order: need >= 2 matching samples");
  for (std::size_t i = 1; i < hs.size(); ++i)
    if (!(hs[i] < hs[i - 1]))
      throw std::invalid_argument("observed_order: h must decrease monotonically");
  const std::size_t n = hs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(hs[i]);
    const double ly = std::log(std::max(errors[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace thm
