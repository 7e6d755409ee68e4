#pragma once
// Stability machinery around a particular series solution: the linearization
// matrix and its eigenvalues, the scaled frame
//   rho = rho* + omega0 * tau^{-1/4} * R(eta),  psi = psi* + Psi(eta),
//   eta = (4/5) * tau^{5/4},  omega0 = sqrt(P'(psi0)) * (4*lambda)^{-1/4},
// the slowly varying Hamiltonian H and Lyapunov function V evaluated in that
// frame, the frozen (eta -> infinity) Hamiltonian H0 with its oscillation
// frequency law, and a perturbation witness separating stable from unstable
// equilibrium phases dynamically.

#include <complex>
#include <vector>

#include "autores/asymptotics.hpp"
#include "autores/integrator.hpp"

namespace autores {

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }
};

struct Eigenvalues {
  std::complex<double> plus;
  std::complex<double> minus;
  double x = 0.0;  // trace/2
  double y = 0.0;  // trace^2/4 - det; negative for a complex pair
};

// Linearization of the slow flow about the truncated series solution,
// entries evaluated at (rho*(tau), psi*(tau)).
Mat2 linearization_matrix(const SeriesCoeffs& c, double tau);

// z_{+-} = x +- sqrt(y) with x = tr/2, y = tr^2/4 - det.
Eigenvalues eigenvalues(const Mat2& a);

struct ScaledPoint {
  double r = 0.0;
  double psi = 0.0;
  double eta = 0.0;
  double d = 0.0;  // sqrt(R^2 + Psi^2)
};

class ScaledFrame {
 public:
  // Requires a stable root: P'(psi0) > degeneracy tolerance.
  static ScaledFrame make(const SeriesCoeffs& c);

  const SeriesCoeffs& series() const { return series_; }
  double omega0() const { return omega0_; }
  double varkappa() const { return varkappa_; }
  double lambda() const { return series_.params.lambda; }
  double delta() const { return series_.delta(); }

  double eta_of_tau(double tau) const;
  double tau_of_eta(double eta) const;

  ScaledPoint to_scaled(double tau, const ModelState& s) const;
  std::pair<double, ModelState> from_scaled(const ScaledPoint& p) const;

  // Small-oscillation frequency 2*omega0*lambda^{1/2} of the frozen flow.
  double linear_frequency() const;

 private:
  SeriesCoeffs series_{};
  double omega0_ = 0.0;
  double varkappa_ = 0.8;
};

// Integral of P(psi0 + phi; delta, nu) over phi in [0, Psi], closed form.
double int_p(double psi0, double delta, double nu, double big_psi);

// Frozen Hamiltonian H0 = omega0*lambda^{1/2}*R^2 + int_p(...)/omega0.
double hamiltonian_h0(const ScaledFrame& f, double r, double big_psi);

// Full slowly varying Hamiltonian H(R, Psi, eta) and the Lyapunov function
//   V = (omega0*lambda^{1/2})^{-1} [H + v1*eta^{-3/5} + v2*eta^{-1}],
//   v1 = kappa^{3/5} R [2*omega0^2*R^2/3 + lambda^{-1/2} * int_p],
//   v2 = -R*Psi/10.
double hamiltonian_h(const ScaledFrame& f, double r, double big_psi, double eta);
double lyapunov_v(const ScaledFrame& f, double r, double big_psi, double eta);

struct LyapunovSample {
  double eta = 0.0;
  double r = 0.0;
  double psi = 0.0;
  double d = 0.0;
  double v = 0.0;
  double dv_deta = 0.0;
};

// Transforms a (rho, psi) trajectory into the scaled frame and measures V and
// its centered finite-difference derivative at n_samples points uniformly
// spaced in eta over [eta_lo, eta_hi]. The difference step is half the linear
// oscillation period: sin(k*pi) = 0 for every harmonic, so the oscillation
// comb injected by the truncated-series frame cancels and the difference
// measures the secular derivative. The trajectory must cover one period
// beyond both window ends.
std::vector<LyapunovSample> lyapunov_along(const Trajectory& traj, const ScaledFrame& f,
                                           double eta_lo, double eta_hi,
                                           std::size_t n_samples);

// Oscillation frequency 2*pi/T(h) of the frozen flow on the closed orbit of
// energy h, measured by first-return integration from (R, Psi) =
// (sqrt(h/(omega0*lambda^{1/2})), 0). Throws DomainError when h lies outside
// the closed-orbit region.
double frozen_frequency(const ScaledFrame& f, double h);

// Leading expansion 2*omega0*lambda^{1/2} + h * P'''(psi0)/(16*omega0^2*lambda^{1/2}).
double omega_formula(const ScaledFrame& f, double h);

// Upper bound h0 of the closed-orbit energy range, located by bisection on
// first-return success.
double find_frozen_h0(const ScaledFrame& f);

struct PerturbationWitness {
  double max_ratio = 0.0;    // max over the run of d(tau)/d0
  double final_ratio = 0.0;  // d at the end of the run (or at truncation)
  bool singular = false;     // amplitude hit the floor before the horizon
};

// Starts on the series solution perturbed by scaled distance d0 at tau0 and
// integrates to horizon*tau0. The scaled distance uses |P'| so the witness
// also applies to unstable roots.
PerturbationWitness run_perturbation_witness(const ModelParams& p, double psi0, double d0,
                                             double tau0, double horizon = 4.0,
                                             double rel_tol = 1e-10, double abs_tol = 1e-12);

}  // namespace autores
