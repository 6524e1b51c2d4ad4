#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "thm/system.hpp"

namespace thm {

enum class PicardStatus { converged, max_iter, diverged };

std::string status_name(PicardStatus s);

struct PicardOptions {
  double tolerance = 1e-10;
  int max_iterations = 1000;
  TransportVariant variant = TransportVariant::stab;
  bool relative_norm = false;  // stopping test on |dx|/|x| instead of |dx|
  double divergence_threshold = 1e12;
  SolverOptions solver;
  std::ostream* log = nullptr;
};

struct PicardState {
  int iterations = 0;
  PicardStatus status = PicardStatus::max_iter;
  std::vector<double> increment_norms;
  std::vector<double> increment_rel_norms;
  std::vector<double> eta_dginf;  // |eta|_{dG,inf} of the velocity used
  std::vector<double> T_dginf;    // ||T_h^k||_{dG,inf} of the new iterate
};

// Element-wise polynomial transport velocity eta = -c_f K grad_h p,
// represented exactly in the degree-l modal basis.
struct EtaField {
  const FESpace* space = nullptr;
  Eigen::VectorXd x, y;
};

EtaField compute_eta(const Eigen::VectorXd& p, const AssemblyContext& ctx);

// |v|_{dG,inf} = ||div_h v||_Linf + max_F max_k (l^2/h_k) ||[v]_n||_Linf(F)
double eta_dg_inf_seminorm(const EtaField& eta, const AssemblyContext& ctx);

// ||S||_{dG,inf} = ||grad_h S||_Linf + max_F max_k (l^2/h_k) ||[S]||_Linf(F)
double dg_inf_norm(const Eigen::VectorXd& T, const AssemblyContext& ctx);

struct CoupledProblem {
  const AssemblyContext* ctx = nullptr;
  DirichletData dirichlet;
  Sources sources;
};

// Fixed-point loop freezing the transport velocity: solve, update eta,
// repeat until the increment norm meets the tolerance. Counts every linear
// solve as one iteration.
std::pair<Eigen::VectorXd, PicardState> fixed_point_solve(
    const CoupledProblem& problem, const PicardOptions& opts);

}  // namespace thm
