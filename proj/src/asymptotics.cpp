#include "autores/asymptotics.hpp"

#include <cmath>

namespace autores {

SeriesCoeffs compute_coeffs(const ModelParams& p, double psi0, const SeriesOptions& opts) {
  p.validate();
  if (!(p.lambda > 0.0)) {
    throw DomainError("series construction requires a positive chirp rate lambda");
  }
  if (!std::isfinite(psi0)) throw PreconditionError("psi0 must be finite");

  SeriesCoeffs c;
  c.params = p;
  c.psi0 = psi0;
  c.mu0 = mu_series_coeff(p.mu, 0);
  c.mu1 = mu_series_coeff(p.mu, 1);
  c.mu2 = mu_series_coeff(p.mu, 2);
  c.mu_index_as_printed = opts.mu_index_as_printed;

  const PhaseParams pp{c.delta(), p.nu};
  const double p0 = p_eval(psi0, pp, 0);
  if (std::abs(p0) > 1e-9 * std::max(1.0, std::abs(pp.delta))) {
    throw PreconditionError("psi0 is not a root of the equilibrium phase equation");
  }
  c.p_prime = p_eval(psi0, pp, 1);
  c.p_double_prime = p_eval(psi0, pp, 2);
  c.p_triple_prime = p_eval(psi0, pp, 3);
  if (std::abs(c.p_prime) <= kDegeneracyTol) {
    throw PreconditionError(
        "P'(psi0) is degenerate: (delta, nu) sits on a bifurcation curve where the "
        "stable/unstable pair coalesces and the recursion is unsolvable");
  }

  const double sqrt_lambda = std::sqrt(p.lambda);
  const double sin_arg = std::sin(2.0 * psi0 + p.nu);
  const double cos_arg = std::cos(2.0 * psi0 + p.nu);

  c.rho_m1 = sqrt_lambda;
  c.rho0 = 0.0;
  c.rho1 = 0.0;  // F_1 = 0

  // G_1 = -rho_{-1}/2
  c.psi1 = -0.5 * c.rho_m1 / c.p_prime;

  // F_2 = (delta*cos(2 psi0 + nu) - cos(psi0)) / lambda^{1/2}
  const double f2 = (pp.delta * cos_arg - std::cos(psi0)) / sqrt_lambda;
  c.rho2 = f2 / (2.0 * c.rho_m1);

  // G_2 = -P'' psi1^2 / 2 - mu_k rho_{-1} sin(2 psi0 + nu)
  const double mu_in_g2 = opts.mu_index_as_printed ? c.mu2 : c.mu1;
  const double g2 = -0.5 * c.p_double_prime * c.psi1 * c.psi1 - mu_in_g2 * c.rho_m1 * sin_arg;
  c.psi2 = g2 / c.p_prime;

  // F_3 = -psi1 (2*delta*sin(2 psi0 + nu) - sin(psi0)) / lambda^{1/2}
  const double f3 = -c.psi1 * (2.0 * pp.delta * sin_arg - std::sin(psi0)) / sqrt_lambda;
  c.rho3 = f3 / (2.0 * c.rho_m1);

  // G_3 = -P'' psi1 psi2 - P''' psi1^3/6 - mu0 rho2 sin(2 psi0 + nu)
  const double g3 = -c.p_double_prime * c.psi1 * c.psi2 -
                    c.p_triple_prime * c.psi1 * c.psi1 * c.psi1 / 6.0 -
                    c.mu0 * c.rho2 * sin_arg;
  c.psi3 = g3 / c.p_prime;

  return c;
}

ModelState eval_series(const SeriesCoeffs& c, double tau) {
  if (!(tau > 0.0)) throw DomainError("series evaluation requires tau > 0");
  const double r = std::sqrt(tau);
  return ModelState{
      c.rho_m1 * r + c.rho0 + c.rho1 / r + c.rho2 / tau + c.rho3 / (tau * r),
      c.psi0 + c.psi1 / r + c.psi2 / tau + c.psi3 / (tau * r),
  };
}

ModelDeriv series_derivative(const SeriesCoeffs& c, double tau) {
  if (!(tau > 0.0)) throw DomainError("series evaluation requires tau > 0");
  const double r = std::sqrt(tau);
  const double tau2 = tau * tau;
  return ModelDeriv{
      0.5 * c.rho_m1 / r - 0.5 * c.rho1 / (tau * r) - c.rho2 / tau2 - 1.5 * c.rho3 / (tau2 * r),
      -0.5 * c.psi1 / (tau * r) - c.psi2 / tau2 - 1.5 * c.psi3 / (tau2 * r),
  };
}

Residual residual(const SeriesCoeffs& c, double tau) {
  const ModelState s = eval_series(c, tau);
  const ModelDeriv d = series_derivative(c, tau);
  const double m = eval_mu(c.params.mu, tau);
  const double arg = 2.0 * s.psi + c.params.nu;
  return Residual{
      d.drho + m * s.rho * std::sin(arg) - std::sin(s.psi),
      s.rho * (d.dpsi - s.rho * s.rho + c.params.lambda * tau + m * std::cos(arg)) -
          std::cos(s.psi),
  };
}

}  // namespace autores
