#pragma once
// The dynamical systems under study: the slow amplitude/phase flow driven by
// combined external and parametric pumping, the physical Duffing oscillator
// it is reduced from, and a small demo system with a known exact solution
// that defeats linear stability analysis.

#include <utility>
#include <variant>
#include <vector>

#include "autores/errors.hpp"

namespace autores {

// Pump amplitude law mu(tau).
//
// ClosedForm: mu(tau) = c * (1 + b*tau)^{-1/2}, defined for 1 + b*tau > 0.
// Series:     mu(tau) = mu0 * tau^{-1/2} + sum_{k>=1} mu_k * tau^{-(2k+1)/2},
//             evaluated as the finite partial sum, defined for tau > 0.
struct MuClosedForm {
  double c = 0.0;
  double b = 1.0;
};

struct MuSeries {
  std::vector<double> coeffs;  // coeffs[k] multiplies tau^{-(2k+1)/2}
};

struct MuSpec {
  std::variant<MuSeries, MuClosedForm> form{MuSeries{{0.0}}};

  static MuSpec closed_form(double c, double b);
  static MuSpec series(std::vector<double> coeffs);
  static MuSpec zero() { return MuSpec{}; }

  bool is_zero() const;
  void validate() const;
};

double eval_mu(const MuSpec& mu, double tau);

// Leading coefficient mu0 = lim_{tau->inf} tau^{1/2} * mu(tau).
double mu_leading_coeff(const MuSpec& mu);

// Coefficient of tau^{-(2k+1)/2} in the large-tau expansion of mu(tau).
double mu_series_coeff(const MuSpec& mu, int k);

struct ModelParams {
  double lambda = 1.0;      // chirp rate, nonzero
  double nu = 0.0;          // phase offset in [0, pi)
  MuSpec mu{};              // pump amplitude law
  double rho_floor = 1e-8;  // amplitude floor; below it the psi equation is singular

  void validate() const;
  // Combined excitation parameter delta = mu0 * lambda^{1/2}.
  double delta() const;
};

struct ModelState {
  double rho = 0.0;
  double psi = 0.0;
};

struct ModelDeriv {
  double drho = 0.0;
  double dpsi = 0.0;
};

// Slow-flow right-hand side, solved for the derivatives:
//   drho/dtau = sin(psi) - mu(tau) * rho * sin(2*psi + nu)
//   dpsi/dtau = rho^2 - lambda*tau - mu(tau)*cos(2*psi + nu) + cos(psi)/rho
// psi is kept unwrapped so phase drift stays measurable.
// Throws SingularityError when rho is at or below the floor.
ModelDeriv model_rhs(const ModelParams& p, double tau, const ModelState& s);

struct DuffingParams {
  double eps = 1e-2;    // perturbation size, 0 < eps < 0.1
  double alpha = 1e-4;  // chirp coefficient, 0 < alpha < 0.01
  double beta = 1.0;    // parametric pump amplitude
  double gamma = 1.0;   // nonlinearity, > 0
  double nu = 0.0;      // phase offset in [0, pi)

  void validate() const;
};

// Drive phase phi(t) = t - alpha*t^2.
double duffing_phase(const DuffingParams& p, double t);

// First-order form of  u'' + (1 + eps*B(t)) (u - gamma*eps*u^3) = eps*A(t)
// with A = cos(phi), B = beta*(1 + eps*t)^{-1/2} * cos(2*phi + nu).
// Returns (du/dt, dv/dt). Throws DomainError when 1 + eps*t <= 0.
std::pair<double, double> duffing_rhs(const DuffingParams& p, double t, double u, double v);

// Demo system  a' = a*b*t^{-1/4} - a/t,  b' = -b/(2t)  with exact solution
//   a(t) = a0 * t^{-1} * exp(4*b0*t^{1/4}),  b(t) = b0 * t^{-1/2}.
// Both eigenvalues of its linearization at the origin are negative for every
// t > 0, yet solutions with a0 != 0, b0 > 0 grow without bound.
std::pair<double, double> demo_es_rhs(double t, double a, double b);
std::pair<double, double> demo_es_exact(double a0, double b0, double t);
// Eigenvalues (-3 -+ 1)/(4t) of the linearization at the origin.
std::pair<double, double> demo_es_linearization_eigenvalues(double t);

}  // namespace autores
