#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <stdexcept>
#include <string>

#include "thm/forms.hpp"

namespace thm {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SolveMethod { automatic, direct_lu, gmres_ilu };

struct SolverOptions {
  SolveMethod method = SolveMethod::automatic;
  double rel_tol = 1e-12;
  int max_krylov = 4000;
  int direct_cell_limit = 3100;  // automatic rule: direct up to this size
};

// Empty std::function means homogeneous data / zero source.
struct DirichletData {
  VectorFn g_u;
  ScalarFn g_p;
  ScalarFn g_T;
};

struct Sources {
  VectorFn f;
  ScalarFn g;
  ScalarFn H;
};

struct BlockSystem {
  SpMat A;
  Eigen::VectorXd rhs;
  BlockLayout layout;
};

// Everything except the transport linearization; reused across fixed-point
// iterations.
struct ConstantPart {
  SpMat A;
  Eigen::VectorXd rhs;
  BlockLayout layout;
};

ConstantPart assemble_constant(const AssemblyContext& ctx,
                               const DirichletData& bc, const Sources& src);

// Transport block (and its inflow lifting) in global coordinates.
void transport_matrix(const AssemblyContext& ctx, TransportVariant variant,
                      const TransportState& state, const DirichletData& bc,
                      SpMat& C, Eigen::VectorXd& rhs);

BlockSystem assemble_global(const AssemblyContext& ctx,
                            TransportVariant variant,
                            const TransportState& state,
                            const DirichletData& bc, const Sources& src);

Eigen::VectorXd solve_linear(const BlockSystem& system,
                             const SolverOptions& opts = {});

// Direct solver that keeps the symbolic analysis across factorizations of
// matrices with an identical sparsity pattern.
class ReusableLU {
 public:
  void factorize(const SpMat& A);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

enum class BlockId { u, p, T, phi };

SpMat extract_block(const SpMat& A, const BlockLayout& layout, BlockId row,
                    BlockId col);

void write_matrix_market(const SpMat& A, const std::string& path);

}  // namespace thm
