#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thm/mms.hpp"
#include "thm/picard.hpp"

namespace thm {

enum class ExperimentKind {
  convergence_h,
  convergence_p,
  robustness_theta,
  robustness_kappa,
  robustness_thetakappa,
  superconvergence_h,
  superconvergence_nu,
};

std::string kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);

// Coefficient set of the convergence study.
ElementParams default_params();

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::convergence_h;
  std::vector<int> cells{100};
  std::vector<int> degrees{2};
  std::vector<TransportVariant> variants{TransportVariant::vol};
  std::vector<double> theta_values;  // robustness-theta sweep
  std::vector<double> nu_values;     // superconvergence-nu sweep

  std::optional<double> theta;   // Theta = theta * I
  std::optional<double> kappa;   // K = kappa * I
  std::optional<double> a0b0c0;  // a0 = b0 = c0 override
  std::optional<double> cf;      // c_f override
  double nu_u = 1.0, nu_p = 1.0, nu_T = 1.0;
  bool mirrored = false;  // y-mirrored second displacement component

  std::uint64_t seed = 42;
  int lloyd = 100;
  double tolerance = 1e-10;
  int max_iterations = 1000;
  double penalty = 10.0;
  bool upwind_all_faces = false;

  std::vector<int> heavy_cells;
  std::vector<int> heavy_degrees;
  std::vector<TransportVariant> allow_max_iter;  // expected failures
  std::string out;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

struct RunRow {
  std::string kind;
  TransportVariant variant = TransportVariant::vol;
  int ell = 0;
  int N = 0;
  double h = 0.0;
  std::string status;  // converged | max_iter | diverged | solver_error
  int iters = 0;
  ErrorReport err;
  bool heavy = false;
};

struct ExperimentResult {
  std::vector<RunRow> rows;
  std::string csv;
  bool all_ok = true;
};

// Runs the configured sweep; heavy points are skipped unless requested.
// The CSV string is byte-deterministic for a fixed config.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                bool include_heavy = false);

std::string rows_to_csv(const std::vector<RunRow>& rows);

}  // namespace thm
