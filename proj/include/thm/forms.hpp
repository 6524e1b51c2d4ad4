#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "thm/fespace.hpp"
#include "thm/params.hpp"

namespace thm {

using Triplets = std::vector<Eigen::Triplet<double>>;
using SpMat = Eigen::SparseMatrix<double>;
using ScalarFn = std::function<double(Vec2)>;
using VectorFn = std::function<Vec2(Vec2)>;

// Linearizations of the convective term compared in the experiments.
enum class TransportVariant { old_scheme, vol, plain, stab };

std::string variant_name(TransportVariant v);
TransportVariant variant_from_name(const std::string& name);

struct TransportState {
  const Eigen::VectorXd* p_prev = nullptr;  // needed by vol/plain/stab
  const Eigen::VectorXd* T_prev = nullptr;  // needed by old_scheme
};

// Dof blocks of the coupled vector (u_x,u_y | p | T | phi).
struct BlockLayout {
  int nloc_l = 0;
  int nloc_m = 0;
  int ncells = 0;
  int off_u = 0, off_p = 0, off_T = 0, off_phi = 0, total = 0;

  static BlockLayout create(int nloc_l, int nloc_m, int ncells);
  int n_u() const { return 2 * nloc_l * ncells; }
  int n_p() const { return nloc_l * ncells; }
  int n_phi() const { return nloc_m * ncells; }
  int u_dof(int c, int comp, int j) const {
    return off_u + (c * 2 + comp) * nloc_l + j;
  }
  int p_dof(int c, int j) const { return off_p + c * nloc_l + j; }
  int T_dof(int c, int j) const { return off_T + c * nloc_l + j; }
  int phi_dof(int c, int j) const { return off_phi + c * nloc_m + j; }
};

// Shared assembly state for one (mesh, degrees, parameters) configuration:
// spaces, tableaus at quadrature order 3l+2 (the trilinear transport term
// integrates products of three degree-l factors), face coefficients.
struct AssemblyContext {
  const PolyMesh* mesh = nullptr;
  std::shared_ptr<FESpace> space_l;  // scalar degree l (p, T, u components)
  std::shared_ptr<FESpace> space_m;  // scalar degree m (total pressure)
  std::shared_ptr<FESpace> space_u;  // vector view of the degree-l space
  ModelParams params;
  PenaltyParams penalties;
  int ell = 1, m = 1;
  SpaceTables tab_l;
  SpaceTables tab_m_;  // empty when m == ell
  std::vector<FaceCoefficients> fc;

  const SpaceTables& tabm() const { return m == ell ? tab_l : tab_m_; }
  BlockLayout layout() const {
    return BlockLayout::create(space_l->nloc(), space_m->nloc(),
                               mesh->n_cells());
  }

  static AssemblyContext create(const PolyMesh& mesh, int ell, int m,
                                ModelParams params, PenaltyParams penalties);
};

// Assemblers emit block-local indices; the system module scatters them.
struct ScalarBlock {
  Triplets trip;          // square over scalar-l dofs
  Eigen::VectorXd rhs;    // Dirichlet lifting (zero without data)
};

struct VectorBlock {
  Triplets trip;          // square over u dofs
  Eigen::VectorXd rhs;
};

struct RectBlock {
  Triplets trip;            // B[i_u, j_phi] = B_h(phi_j, v_i)
  Eigen::VectorXd rhs_phi;  // boundary lifting of the +B_h(psi, u) row
};

struct CBlock {
  Triplets trip;          // (T,T), or (T,p) for old_scheme
  Eigen::VectorXd rhs;    // inflow data lifting (stab only)
  bool couples_pressure = false;
};

ScalarBlock assemble_AT(const AssemblyContext& ctx,
                        const ScalarFn* g_T = nullptr);
ScalarBlock assemble_Ap(const AssemblyContext& ctx,
                        const ScalarFn* g_p = nullptr);
VectorBlock assemble_Ae(const AssemblyContext& ctx,
                        const VectorFn* g_u = nullptr);
RectBlock assemble_B(const AssemblyContext& ctx, const VectorFn* g_u = nullptr);
Triplets assemble_D(const AssemblyContext& ctx);
// Local layout [p | T | phi] over (n_p + n_p + n_phi) indices.
Triplets assemble_M(const AssemblyContext& ctx);
CBlock assemble_C(const AssemblyContext& ctx, TransportVariant variant,
                  const TransportState& state, const ScalarFn* g_T = nullptr);
// Stabilization pieces of the stab variant, exposed separately.
Triplets assemble_upwind(const AssemblyContext& ctx,
                         const Eigen::VectorXd& p_prev);
ScalarBlock assemble_inflow(const AssemblyContext& ctx,
                            const Eigen::VectorXd& p_prev,
                            const ScalarFn* g_T = nullptr);

struct SourceVectors {
  Eigen::VectorXd u, p, T;
};
SourceVectors assemble_sources(const AssemblyContext& ctx, const VectorFn& f,
                               const ScalarFn& g, const ScalarFn& H);

SpMat matrix_from(const Triplets& trip, int rows, int cols);

// Direct quadrature evaluation of the transport forms and the identities
// they satisfy; shares the context's rules so the nonsmooth upwind/inflow
// weights cancel exactly between the two sides.
double form_value_Cvol(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                       const Eigen::VectorXd& p, const Eigen::VectorXd& S);
double form_value_Ctilde(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                         const Eigen::VectorXd& p, const Eigen::VectorXd& S);
double form_value_Cstab(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                        const Eigen::VectorXd& p, const Eigen::VectorXd& S);
double form_value_suw(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                      const Eigen::VectorXd& p, const Eigen::VectorXd& S);
double form_value_sinflow(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                          const Eigen::VectorXd& p, const Eigen::VectorXd& S);
// B_h(T^2, eta) with eta = -c_f K grad_h p
double form_value_B_Tsq_eta(const AssemblyContext& ctx,
                            const Eigen::VectorXd& T,
                            const Eigen::VectorXd& p);
// -1/2 (div_h eta, T^2) + 1/2 sum_F int [[eta]]_n {T^2}
double prop33_rhs(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                  const Eigen::VectorXd& p);
// 1/2 B_h(T^2, eta) + sum_FI int |{eta}.n|/2 [[T]]^2 + sum_FB (eta.n)^- T^2
double prop36_rhs(const AssemblyContext& ctx, const Eigen::VectorXd& T,
                  const Eigen::VectorXd& p);

}  // namespace thm
