#pragma once
// Particular power-series solution of the slow flow about an equilibrium
// phase psi0:
//   rho*(tau) = rho_{-1} tau^{1/2} + rho_0 + sum_{k=1..3} rho_k tau^{-k/2}
//   psi*(tau) = psi0 + sum_{k=1..3} psi_k tau^{-k/2}
// with coefficients from the linear recursion
//   2 rho_{-1} rho_k = F_k,   P'(psi0) psi_k = G_k,
// truncated at k = 3, plus the defect both truncated series leave in the
// governing equations.

#include <cmath>

#include "autores/equilibria.hpp"
#include "autores/model.hpp"

namespace autores {

struct SeriesOptions {
  // G_2 couples the pump through its third expansion coefficient as printed;
  // the toggle switches that to the second coefficient instead.
  bool mu_index_as_printed = true;
};

struct SeriesCoeffs {
  double psi0 = 0.0;
  double rho_m1 = 0.0;  // rho_{-1} = lambda^{1/2}
  double rho0 = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho3 = 0.0;
  double psi1 = 0.0;
  double psi2 = 0.0;
  double psi3 = 0.0;
  ModelParams params{};
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  bool mu_index_as_printed = true;
  // Cached derivatives of P at psi0 for delta = mu0 * lambda^{1/2}.
  double p_prime = 0.0;
  double p_double_prime = 0.0;
  double p_triple_prime = 0.0;

  double delta() const { return mu0 * std::sqrt(params.lambda); }
};

// Builds the coefficients for the root psi0. Requires lambda > 0, psi0 a root
// of P, and |P'(psi0)| above the degeneracy tolerance (otherwise the pair sits
// on a bifurcation curve and the recursion is unsolvable).
SeriesCoeffs compute_coeffs(const ModelParams& p, double psi0, const SeriesOptions& opts = {});

ModelState eval_series(const SeriesCoeffs& c, double tau);
ModelDeriv series_derivative(const SeriesCoeffs& c, double tau);

struct Residual {
  double r_rho = 0.0;  // drho/dtau + mu*rho*sin(2 psi + nu) - sin(psi)
  double r_psi = 0.0;  // rho*(dpsi/dtau - rho^2 + lambda*tau + mu*cos(2 psi + nu)) - cos(psi)
};

Residual residual(const SeriesCoeffs& c, double tau);

}  // namespace autores
