#pragma once

#include <span>
#include <vector>

#include "thm/forms.hpp"
#include "thm/system.hpp"

namespace thm {

// Second-order 2D jet: value plus first and second derivatives. Closed under
// the arithmetic below, so forcing terms are generated, never hand-typed.
struct Jet2 {
  double v = 0.0, dx = 0.0, dy = 0.0, dxx = 0.0, dxy = 0.0, dyy = 0.0;

  static Jet2 constant(double c) { return {c, 0, 0, 0, 0, 0}; }
  static Jet2 var_x(double x) { return {x, 1, 0, 0, 0, 0}; }
  static Jet2 var_y(double y) { return {y, 0, 1, 0, 0, 0}; }
};

Jet2 operator+(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a, const Jet2& b);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator*(double s, const Jet2& a);
Jet2 operator-(const Jet2& a);
Jet2 sin(const Jet2& a);
Jet2 cos(const Jet2& a);

enum class CaseKind {
  trig,            // the transcendental case, displacement as printed
  trig_mirrored,   // second displacement component mirrored in y
  poly_linear,     // degree-1 polynomial patch case
  poly_quadratic,  // degree-2 polynomial patch case
};

struct CaseFields {
  Jet2 u1, u2, p, T;
};

struct ManufacturedCase {
  CaseKind kind = CaseKind::trig;
  double nu_u = 1.0, nu_p = 1.0, nu_T = 1.0;

  CaseFields fields(Vec2 x) const;
};

struct ExactState {
  Vec2 u;
  double p = 0.0, T = 0.0, phi = 0.0;
};

// phi = lambda div u - alpha p - beta T
ExactState exact_eval(const ManufacturedCase& c, const ElementParams& ep,
                      Vec2 x);

struct PointForcing {
  Vec2 f;
  double g = 0.0, H = 0.0;
};

PointForcing derive_forcings(const ManufacturedCase& c,
                             const ElementParams& ep, Vec2 x);

DirichletData dirichlet_from(const ManufacturedCase& c);
Sources sources_from(const ManufacturedCase& c, const ElementParams& ep);

struct ErrorReport {
  double u_L2 = 0, u_dG = 0;
  double p_L2 = 0, p_dG = 0;
  double T_L2 = 0, T_dG = 0;
  double phi_L2 = 0;
  double h = 0;
  int iterations = 0;
};

// L2 and dG error norms of a coupled solution against the closed forms;
// fixed quadrature order 2l+4 (the exact fields are transcendental).
ErrorReport error_norms(const Eigen::VectorXd& x, const ManufacturedCase& c,
                        const AssemblyContext& ctx);

// Least-squares slope of log(error) vs log(h).
double observed_order(std::span<const double> errors,
                      std::span<const double> hs);

}  // namespace thm
