#include "thm/system.hpp"

#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace thm {

namespace {

void shift_into(const Triplets& local, int row_off, int col_off,
                Triplets& out) {
  for (const auto& t : local)
    out.emplace_back(row_off + t.row(), col_off + t.col(), t.value());
}

Eigen::VectorXd zero_sources_guard(int n) { return Eigen::VectorXd::Zero(n); }

}  // namespace

ConstantPart assemble_constant(const AssemblyContext& ctx,
                               const DirichletData& bc, const Sources& src) {
  const BlockLayout layout = ctx.layout();
  ConstantPart out;
  out.layout = layout;
  out.rhs = zero_sources_guard(layout.total);

  Triplets trip;

  ScalarBlock at = assemble_AT(ctx, bc.g_T ? &bc.g_T : nullptr);
  shift_into(at.trip, layout.off_T, layout.off_T, trip);
  out.rhs.segment(layout.off_T, layout.n_p()) += at.rhs;

  ScalarBlock ap = assemble_Ap(ctx, bc.g_p ? &bc.g_p : nullptr);
  shift_into(ap.trip, layout.off_p, layout.off_p, trip);
  out.rhs.segment(layout.off_p, layout.n_p()) += ap.rhs;

  VectorBlock ae = assemble_Ae(ctx, bc.g_u ? &bc.g_u : nullptr);
  shift_into(ae.trip, layout.off_u, layout.off_u, trip);
  out.rhs.segment(layout.off_u, layout.n_u()) += ae.rhs;

  RectBlock b = assemble_B(ctx, bc.g_u ? &bc.g_u : nullptr);
  trip.reserve(trip.size() + 2 * b.trip.size());
  for (const auto& t : b.trip) {
    // Eq.(26) signs: u-row gets -B_h(phi, v); phi-row gets +B_h(psi, u).
    trip.emplace_back(layout.off_u + t.row(), layout.off_phi + t.col(),
                      -t.value());
    trip.emplace_back(layout.off_phi + t.col(), layout.off_u + t.row(),
                      t.value());
  }
  out.rhs.segment(layout.off_phi, layout.n_phi()) += b.rhs_phi;

  Triplets d = assemble_D(ctx);
  shift_into(d, layout.off_phi, layout.off_phi, trip);

  Triplets m = assemble_M(ctx);
  const int np = layout.n_p();
  for (const auto& t : m) {
    auto map = [&](int i) {
      if (i < np) return layout.off_p + i;
      if (i < 2 * np) return layout.off_T + (i - np);
      return layout.off_phi + (i - 2 * np);
    };
    trip.emplace_back(map(t.row()), map(t.col()), t.value());
  }

  if (src.f || src.g || src.H) {
    VectorFn f = src.f ? src.f : [](Vec2) { return Vec2{0.0, 0.0}; };
    ScalarFn g = src.g ? src.g : [](Vec2) { return 0.0; };
    ScalarFn H = src.H ? src.H : [](Vec2) { return 0.0; };
    SourceVectors sv = assemble_sources(ctx, f, g, H);
    out.rhs.segment(layout.off_u, layout.n_u()) += sv.u;
    out.rhs.segment(layout.off_p, layout.n_p()) += sv.p;
    out.rhs.segment(layout.off_T, layout.n_p()) += sv.T;
  }

  out.A.resize(layout.total, layout.total);
  out.A.setFromTriplets(trip.begin(), trip.end());
  return out;
}

void transport_matrix(const AssemblyContext& ctx, TransportVariant variant,
                      const TransportState& state, const DirichletData& bc,
                      SpMat& C, Eigen::VectorXd& rhs) {
  const BlockLayout layout = ctx.layout();
  CBlock cb = assemble_C(ctx, variant, state, bc.g_T ? &bc.g_T : nullptr);
  Triplets trip;
  trip.reserve(cb.trip.size());
  const int col_off = cb.couples_pressure ? layout.off_p : layout.off_T;
  shift_into(cb.trip, layout.off_T, col_off, trip);
  C.resize(layout.total, layout.total);
  C.setFromTriplets(trip.begin(), trip.end());
  rhs = zero_sources_guard(layout.total);
  rhs.segment(layout.off_T, layout.n_p()) += cb.rhs;
}

BlockSystem assemble_global(const AssemblyContext& ctx,
                            TransportVariant variant,
                            const TransportState& state,
                            const DirichletData& bc, const Sources& src) {
  ConstantPart base = assemble_constant(ctx, bc, src);
  SpMat c;
  Eigen::VectorXd crhs;
  transport_matrix(ctx, variant, state, bc, c, crhs);
  BlockSystem sys;
  sys.layout = base.layout;
  sys.A = base.A + c;
  sys.rhs = base.rhs + crhs;
  return sys;
}

namespace {

void check_residual(const SpMat& A, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& b, double tol,
                    const char* method) {
  const double rnorm = (A * x - b).norm();
  const double bnorm = b.norm();
  double residual;
  if (bnorm > 0.0)
    residual = rnorm / bnorm;
  else
    residual = rnorm / A.norm();  // Frobenius
  if (!(residual <= tol)) {
    // Backward-error fallback: a badly scaled system can have a residual
    // small relative to |A||x| yet large relative to |b|.
    const double backward = rnorm / (A.norm() * x.norm() + bnorm);
    if (!(backward <= tol)) {
      char buf[128];
      std::snprintf(buf, sizeof(buf),
                    "%s solve failed: residual %.3e (backward %.3e), "
                    "tolerance %.3e",
                    method, residual, backward, tol);
      throw SolverError(buf);
    }
  }
}

}  // namespace

Eigen::VectorXd solve_linear(const BlockSystem& system,
                             const SolverOptions& opts) {
  const SpMat& A = system.A;
  if (A.rows() != A.cols())
    throw SolverError("solve_linear: matrix must be square");
  bool direct = true;
  if (opts.method == SolveMethod::gmres_ilu) direct = false;
  if (opts.method == SolveMethod::automatic) {
    const int cells = system.layout.ncells;
    direct = cells <= opts.direct_cell_limit;
  }
  if (direct) {
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw SolverError("sparse LU factorization failed (singular matrix?)");
    Eigen::VectorXd x = lu.solve(system.rhs);
    check_residual(A, x, system.rhs, opts.rel_tol, "direct LU");
    return x;
  }
  Eigen::GMRES<SpMat, Eigen::IncompleteLUT<double>> gmres;
  gmres.setMaxIterations(opts.max_krylov);
  gmres.setTolerance(opts.rel_tol);
  gmres.set_restart(200);
  gmres.preconditioner().setFillfactor(30);
  gmres.preconditioner().setDroptol(1e-6);
  gmres.compute(A);
  if (gmres.info() != Eigen::Success)
    throw SolverError("ILU preconditioner setup failed");
  Eigen::VectorXd x = gmres.solve(system.rhs);
  if (gmres.info() != Eigen::Success) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "GMRES stagnated: attained residual %.3e after %d iterations",
                  gmres.error(), static_cast<int>(gmres.iterations()));
    throw SolverError(buf);
  }
  check_residual(A, x, system.rhs, opts.rel_tol * 10.0, "GMRES");
  return x;
}

void ReusableLU::factorize(const SpMat& A) {
  if (!analyzed_) {
    lu_.analyzePattern(A);
    analyzed_ = true;
  }
  lu_.factorize(A);
  if (lu_.info() != Eigen::Success)
    throw SolverError("sparse LU factorization failed (singular matrix?)");
}

Eigen::VectorXd ReusableLU::solve(const Eigen::VectorXd& rhs) const {
  return lu_.solve(rhs);
}

SpMat extract_block(const SpMat& A, const BlockLayout& layout, BlockId row,
                    BlockId col) {
  auto range = [&](BlockId b) -> std::pair<int, int> {
    switch (b) {
      case BlockId::u: return {layout.off_u, layout.n_u()};
      case BlockId::p: return {layout.off_p, layout.n_p()};
      case BlockId::T: return {layout.off_T, layout.n_p()};
      case BlockId::phi: return {layout.off_phi, layout.n_phi()};
    }
    return {0, 0};
  };
  auto [r0, nr] = range(row);
  auto [c0, nc] = range(col);
  SpMat block = A.block(r0, c0, nr, nc);
  return block;
}

void write_matrix_market(const SpMat& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  char buf[80];
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n",
                    static_cast<int>(it.row()) + 1,
                    static_cast<int>(it.col()) + 1, it.value());
      out << buf;
    }
  }
}

}  // namespace thm
