#include "thm/params.hpp"

#include <cmath>
#include <string>

namespace thm {

void ModelParams::validate() const {
  for (std::size_t c = 0; c < elems.size(); ++c) {
    const ElementParams& p = elems[c];
    auto fail = [&](const std::string& what) {
      throw ParameterError("element " + std::to_string(c) + ": " + what);
    };
    if (!(p.K.eig_min() > 0.0)) fail("K must be symmetric positive definite");
    if (p.Theta.eig_min() < -1e-14 * std::abs(p.Theta.eig_max()))
      fail("Theta must have nonnegative eigenvalues");
    if (!(p.mu > 0.0)) fail("mu must be positive");
    if (!(p.c_f >= 0.0)) fail("c_f must be nonnegative");
    if (!(p.alpha > p.porosity && p.alpha <= 1.0))
      fail("alpha must lie in (porosity, 1]");
    if (!(p.beta > 0.0)) fail("beta must be positive");
    if (!(p.lambda > 0.0))
      fail("lambda must be strictly positive (the four-field form divides by it)");
    if (!(p.b0 >= 0.0 && p.a0 >= p.b0 && p.c0 >= p.b0))
      fail("need a0, c0 >= b0 >= 0");
  }
}

void PenaltyParams::validate() const {
  if (!(alpha1 > 0 && alpha2 > 0 && alpha3 > 0 && alpha4 > 0))
    throw ParameterError("penalty parameters must be positive");
  if (!(upwind_scale >= 0))
    throw ParameterError("upwind scale must be nonnegative");
}

FaceCoefficients face_coefficients(const PolyMesh& mesh, int face,
                                   const ModelParams& params,
                                   const PenaltyParams& penalties, int ell,
                                   int m) {
  const Face& f = mesh.faces[face];
  const Vec2 n = f.normal;
  FaceCoefficients out;

  auto normal_component = [&](const Sym2& tensor, const char* name) {
    const double d = tensor.quad(n);
    if (d < -1e-14 * std::max(1.0, std::abs(tensor.eig_max())))
      throw ParameterError(std::string(name) +
                           " has negative normal component on face " +
                           std::to_string(face));
    return std::max(d, 0.0);
  };

  const ElementParams& po = params[f.owner];
  const double ell2 = static_cast<double>(ell) * ell;

  if (f.is_boundary()) {
    const double h = mesh.cell_diameter[f.owner];
    out.sigma = penalties.alpha1 * normal_component(po.Theta, "Theta") * ell2 / h;
    out.xi = penalties.alpha2 * normal_component(po.K, "K") * ell2 / h;
    out.zeta = penalties.alpha3 * po.mu * ell2 / h;
    out.rho = penalties.alpha4 * h / m;
    return out;
  }

  const ElementParams& pn = params[f.neighbor];
  const double d_theta[2] = {normal_component(po.Theta, "Theta"),
                             normal_component(pn.Theta, "Theta")};
  const double d_k[2] = {normal_component(po.K, "K"),
                         normal_component(pn.K, "K")};
  const double d_mu[2] = {po.mu, pn.mu};

  auto weights = [](const double d[2], double omega[2], double& gamma) {
    const double sum = d[0] + d[1];
    if (sum <= 0.0) {
      omega[0] = omega[1] = 0.5;
      gamma = 0.0;
    } else {
      omega[0] = d[1] / sum;
      omega[1] = d[0] / sum;
      gamma = d[0] * d[1] / sum;
    }
  };
  weights(d_theta, out.omega_theta, out.gamma_theta);
  weights(d_k, out.omega_k, out.gamma_k);
  weights(d_mu, out.omega_mu, out.gamma_mu);

  const double ho = mesh.cell_diameter[f.owner];
  const double hn = mesh.cell_diameter[f.neighbor];
  const double max_lh = std::max(ell2 / ho, ell2 / hn);
  out.sigma = penalties.alpha1 * out.gamma_theta * max_lh;
  out.xi = penalties.alpha2 * out.gamma_k * max_lh;
  out.zeta = penalties.alpha3 * out.gamma_mu * max_lh;
  out.rho = penalties.alpha4 * std::min(ho, hn) / m;
  return out;
}

}  // namespace thm
