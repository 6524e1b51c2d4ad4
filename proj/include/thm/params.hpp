#pragma once

#include <stdexcept>
#include <vector>

#include "thm/geometry.hpp"
#include "thm/mesh.hpp"

namespace thm {

struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Element-wise constant physical coefficients.
struct ElementParams {
  double a0 = 0.0;      // thermal capacity
  double b0 = 0.0;      // thermal dilatation
  double c0 = 0.0;      // specific storage
  double alpha = 1.0;   // Biot-Willis
  double beta = 1.0;    // thermal stress
  double c_f = 0.0;     // fluid heat capacity / reference temperature
  double mu = 1.0;      // shear modulus
  double lambda = 1.0;  // first Lame parameter
  Sym2 K = Sym2::identity();      // hydraulic mobility
  Sym2 Theta = Sym2::identity();  // thermal conductivity
  double porosity = 0.0;          // informational
};

struct ModelParams {
  std::vector<ElementParams> elems;

  static ModelParams uniform(const ElementParams& p, int n_cells) {
    ModelParams mp;
    mp.elems.assign(n_cells, p);
    return mp;
  }

  const ElementParams& operator[](int c) const { return elems[c]; }
  ElementParams& operator[](int c) { return elems[c]; }

  // Assumption checks: K SPD, Theta symmetric PSD, mu > 0, c_f >= 0,
  // alpha in (porosity, 1], beta > 0, lambda > 0, a0 >= b0 >= 0, c0 >= b0.
  void validate() const;
};

struct PenaltyParams {
  double alpha1 = 10.0;
  double alpha2 = 10.0;
  double alpha3 = 10.0;
  double alpha4 = 10.0;
  double upwind_scale = 1.0;     // user parameter of the upwind penalty
  bool upwind_all_faces = false; // penalize boundary faces too (equivalent to
                                 // the inflow term when upwind_scale == 1)
  void validate() const;
};

// Per-face WSIP weights and stabilization function values.
struct FaceCoefficients {
  double omega_theta[2] = {1.0, 0.0};  // [owner, neighbor]
  double omega_k[2] = {1.0, 0.0};
  double omega_mu[2] = {1.0, 0.0};
  double gamma_theta = 0.0;
  double gamma_k = 0.0;
  double gamma_mu = 0.0;
  double sigma = 0.0;
  double xi = 0.0;
  double zeta = 0.0;
  double rho = 0.0;
};

FaceCoefficients face_coefficients(const PolyMesh& mesh, int face,
                                   const ModelParams& params,
                                   const PenaltyParams& penalties, int ell,
                                   int m);

// (|x| - x) / 2
inline double negative_part(double x) { return 0.5 * (std::abs(x) - x); }

}  // namespace thm
