#pragma once
// Bridge between the physical Duffing oscillator and the slow flow: the
// two-scale reduction parameters, the observables E(t) and Delta(t), and a
// windowed comparison of the full oscillation envelope against the reduced
// model's amplitude kappa * rho(eps*t/(2*kappa)).

#include <vector>

#include "autores/capture.hpp"
#include "autores/integrator.hpp"
#include "autores/model.hpp"

namespace autores {

struct ReductionResult {
  double kappa = 0.0;            // (4/(3*gamma))^{1/3}
  double lambda = 0.0;           // 8*alpha*eps^{-2}*kappa^2
  MuSpec mu{};                   // beta*(1 + 2*kappa*tau)^{-1/2}*sqrt(2*kappa)/4
  double slow_time_scale = 0.0;  // tau = slow_time_scale * t = eps*t/(2*kappa)
  double mu0 = 0.0;              // leading pump coefficient
  double delta_model = 0.0;      // mu0 * lambda^{1/2}
  double delta_conclusion = 0.0; // 2*beta*eps^{-1}*alpha^{1/2}*(3*gamma)^{-1/2}
};

ReductionResult reduce(const DuffingParams& p);

// The oscillator as an integrator field in (u, v).
VectorField duffing_field(const DuffingParams& p);

struct DuffingObservables {
  std::vector<double> t;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> energy;  // u^2/2 - gamma*eps*u^4/4 + v^2/2
  std::vector<double> delta;   // unwrapped phi(t) + angle(u, v)
  std::size_t skipped_samples = 0;  // (u, v) = (0, 0) samples where the angle is undefined
};

// Samples E(t) and the unwrapped phase mismatch Delta(t) on a uniform grid.
DuffingObservables observables(const Trajectory& traj, const DuffingParams& p,
                               double sample_dt = 0.19634954084936207);  // 2*pi/32

struct EnvelopeWindow {
  double t_center = 0.0;
  double env_full = 0.0;
  double env_model = 0.0;
  double rel_err = 0.0;
};

struct EnvelopeReport {
  bool captured = false;          // Delta band over the final half below 2*pi
  double delta_band = 0.0;        // max - min of Delta over the final half
  double delta_drift = 0.0;       // max |Delta - Delta(0)| over the run
  double psi0_observed = 0.0;     // mean Delta over the final half, wrapped to [0, 2*pi)
  double energy_growth = 0.0;     // E(t_max) / E(0)
  double energy_final = 0.0;      // E(t_max)
  double energy_max = 0.0;        // max E over the run
  double max_rel_env_err = 0.0;   // over comparison windows (captured runs only)
  bool model_ok = false;          // reduced-model run usable for comparison
  std::vector<EnvelopeWindow> windows;
  ReductionResult reduction;
};

struct CompareOptions {
  double horizon_c = 2.0;        // precondition t_max <= horizon_c / eps
  double window_periods = 3.0;   // envelope window length in fast periods
  double compare_lo = 0.2;       // comparison range [lo, hi] in units of 1/eps
  double compare_hi = 1.0;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  std::size_t max_steps = 5'000'000;
};

// Runs the full oscillator from (u0, v0), runs the reduced model from the
// matched initial data rho0 = |(u0, v0)|/kappa, psi0 = atan2(v0, u0), and
// compares windowed envelopes. For non-captured runs the envelope comparison
// is skipped and drift diagnostics are reported instead.
EnvelopeReport compare_envelope(const DuffingParams& p, double u0, double v0, double t_max,
                                const CompareOptions& opts = {});

}  // namespace autores
