#include "thm/picard.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "thm/kernels.hpp"

namespace thm {

std::string status_name(PicardStatus s) {
  switch (s) {
    case PicardStatus::converged: return "converged";
    case PicardStatus::max_iter: return "max_iter";
    case PicardStatus::diverged: return "diverged";
  }
  return "?";
}

EtaField compute_eta(const Eigen::VectorXd& p, const AssemblyContext& ctx) {
  const FESpace& sp = *ctx.space_l;
  const int nl = sp.nloc();
  EtaField eta;
  eta.space = &sp;
  eta.x = Eigen::VectorXd::Zero(sp.n_scalar_dofs());
  eta.y = Eigen::VectorXd::Zero(sp.n_scalar_dofs());
  for (int c = 0; c < sp.n_cells(); ++c) {
    const CellTable& t = ctx.tab_l.cells[c];
    const ElementParams& ep = ctx.params[c];
    const double* p_local = p.data() + c * nl;
    for (std::size_t q = 0; q < t.rule.size(); ++q) {
      const Vec2 g{kernels::dot(t.dx.row(q).data(), p_local, nl),
                   kernels::dot(t.dy.row(q).data(), p_local, nl)};
      const Vec2 v = ep.K.apply(g) * (-ep.c_f);
      kernels::axpy(t.rule.weights[q] * v.x, t.phi.row(q).data(),
                    eta.x.data() + c * nl, nl);
      kernels::axpy(t.rule.weights[q] * v.y, t.phi.row(q).data(),
                    eta.y.data() + c * nl, nl);
    }
  }
  return eta;
}

double eta_dg_inf_seminorm(const EtaField& eta, const AssemblyContext& ctx) {
  const FESpace& sp = *ctx.space_l;
  const PolyMesh& mesh = *ctx.mesh;
  const int nl = sp.nloc();
  const double ell2 = static_cast<double>(ctx.ell) * ctx.ell;

  double div_max = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellTable& t = ctx.tab_l.cells[c];
    const double* ex = eta.x.data() + c * nl;
    const double* ey = eta.y.data() + c * nl;
    for (std::size_t q = 0; q < t.rule.size(); ++q) {
      const double div = kernels::dot(t.dx.row(q).data(), ex, nl) +
                         kernels::dot(t.dy.row(q).data(), ey, nl);
      div_max = std::max(div_max, std::abs(div));
    }
  }

  double face_max = 0.0;
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    const FaceTable& ft = ctx.tab_l.faces[fi];
    const Vec2 n = f.normal;
    double scale = ell2 / mesh.cell_diameter[f.owner];
    if (!f.is_boundary())
      scale = std::max(scale, ell2 / mesh.cell_diameter[f.neighbor]);
    double jmax = 0.0;
    for (std::size_t q = 0; q < ft.rule.size(); ++q) {
      double jn = kernels::dot(ft.side[0].phi.row(q).data(),
                               eta.x.data() + f.owner * nl, nl) *
                      n.x +
                  kernels::dot(ft.side[0].phi.row(q).data(),
                               eta.y.data() + f.owner * nl, nl) *
                      n.y;
      if (!f.is_boundary()) {
        jn -= kernels::dot(ft.side[1].phi.row(q).data(),
                           eta.x.data() + f.neighbor * nl, nl) *
                  n.x +
              kernels::dot(ft.side[1].phi.row(q).data(),
                           eta.y.data() + f.neighbor * nl, nl) *
                  n.y;
      }
      jmax = std::max(jmax, std::abs(jn));
    }
    face_max = std::max(face_max, scale * jmax);
  }
  return div_max + face_max;
}

double dg_inf_norm(const Eigen::VectorXd& T, const AssemblyContext& ctx) {
  const FESpace& sp = *ctx.space_l;
  const PolyMesh& mesh = *ctx.mesh;
  const int nl = sp.nloc();
  const double ell2 = static_cast<double>(ctx.ell) * ctx.ell;

  double grad_max = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellTable& t = ctx.tab_l.cells[c];
    const double* local = T.data() + c * nl;
    for (std::size_t q = 0; q < t.rule.size(); ++q) {
      const Vec2 g{kernels::dot(t.dx.row(q).data(), local, nl),
                   kernels::dot(t.dy.row(q).data(), local, nl)};
      grad_max = std::max(grad_max, g.norm());
    }
  }
  double face_max = 0.0;
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces[fi];
    const FaceTable& ft = ctx.tab_l.faces[fi];
    double scale = ell2 / mesh.cell_diameter[f.owner];
    if (!f.is_boundary())
      scale = std::max(scale, ell2 / mesh.cell_diameter[f.neighbor]);
    double jmax = 0.0;
    for (std::size_t q = 0; q < ft.rule.size(); ++q) {
      double jump = kernels::dot(ft.side[0].phi.row(q).data(),
                                 T.data() + f.owner * nl, nl);
      if (!f.is_boundary())
        jump -= kernels::dot(ft.side[1].phi.row(q).data(),
                             T.data() + f.neighbor * nl, nl);
      jmax = std::max(jmax, std::abs(jump));
    }
    face_max = std::max(face_max, scale * jmax);
  }
  return grad_max + face_max;
}

std::pair<Eigen::VectorXd, PicardState> fixed_point_solve(
    const CoupledProblem& problem, const PicardOptions& opts) {
  const AssemblyContext& ctx = *problem.ctx;
  const BlockLayout layout = ctx.layout();

  ConstantPart base =
      assemble_constant(ctx, problem.dirichlet, problem.sources);

  bool direct = opts.solver.method != SolveMethod::gmres_ilu;
  if (opts.solver.method == SolveMethod::automatic)
    direct = ctx.mesh->n_cells() <= opts.solver.direct_cell_limit;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.total);
  Eigen::VectorXd p_prev = Eigen::VectorXd::Zero(layout.n_p());
  Eigen::VectorXd T_prev = Eigen::VectorXd::Zero(layout.n_p());

  PicardState state;
  ReusableLU lu;
  SpMat c_mat;
  Eigen::VectorXd c_rhs;

  for (int k = 1; k <= opts.max_iterations; ++k) {
    TransportState ts{&p_prev, &T_prev};
    transport_matrix(ctx, opts.variant, ts, problem.dirichlet, c_mat, c_rhs);
    SpMat A = base.A + c_mat;
    Eigen::VectorXd rhs = base.rhs + c_rhs;

    Eigen::VectorXd x_new;
    if (direct) {
      lu.factorize(A);
      x_new = lu.solve(rhs);
    } else {
      BlockSystem sys{std::move(A), std::move(rhs), layout};
      SolverOptions so = opts.solver;
      so.method = SolveMethod::gmres_ilu;
      x_new = solve_linear(sys, so);
    }

    const double inc = (x_new - x).norm();
    const double xn = x_new.norm();
    const double rel = inc / (xn > 0.0 ? xn : 1.0);
    state.increment_norms.push_back(inc);
    state.increment_rel_norms.push_back(rel);
    state.iterations = k;

    const EtaField eta_used = compute_eta(p_prev, ctx);
    state.eta_dginf.push_back(eta_dg_inf_seminorm(eta_used, ctx));
    state.T_dginf.push_back(
        dg_inf_norm(x_new.segment(layout.off_T, layout.n_p()), ctx));

    if (opts.log) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "iter %d |D| %.6e |D|_rel %.6e "
                    "|eta|_dGinf %.6e\n",
                    k, inc, rel, state.eta_dginf.back());
      (*opts.log) << buf;
    }

    if (!std::isfinite(inc) || inc > opts.divergence_threshold) {
      state.status = PicardStatus::diverged;
      x = x_new;
      break;
    }
    x = x_new;
    p_prev = x.segment(layout.off_p, layout.n_p());
    T_prev = x.segment(layout.off_T, layout.n_p());

    const double metric = opts.relative_norm ? rel : inc;
    if (metric <= opts.tolerance) {
      state.status = PicardStatus::converged;
      break;
    }
    if (k == opts.max_iterations) state.status = PicardStatus::max_iter;
  }
  return {x, state};
}

}  // namespace thm
