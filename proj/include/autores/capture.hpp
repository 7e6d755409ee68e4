#pragma once
// Classification of slow-flow trajectories as captured (phase locked to a
// stable equilibrium phase with rho^2 tracking lambda*tau), escaped
// (phase-slipping drift or amplitude collapse), or undetermined; grid scans
// over initial data; envelope/frequency fits of the captured oscillation; and
// a threshold sweep comparing algebraic and dynamical stability per root.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autores/equilibria.hpp"
#include "autores/integrator.hpp"
#include "autores/stability.hpp"

namespace autores {

struct CaptureCriteria {
  double phase_window = 1.5707963267948966;  // pi/2 around a stable root
  double amp_band_lo = 0.8;                  // rho^2/(lambda*tau) band over the tail
  double amp_band_hi = 1.2;
  double drift_limit = 4.0 * 3.141592653589793;  // unwrapped psi drift => escaped
  double collapse_mean = 0.3;                    // mean rho^2/(lambda*tau) below => escaped
  std::size_t tail_samples = 512;
};

enum class VerdictKind { Captured, Escaped, Undetermined };

const char* to_string(VerdictKind k);

struct CaptureVerdict {
  VerdictKind kind = VerdictKind::Undetermined;
  int psi0_index = -1;     // index into the supplied root list when captured
  double psi0_value = 0.0; // the locked equilibrium phase when captured
  double final_tau = 0.0;
  double max_drift = 0.0;  // max |psi - psi(tail start)| over the tail window
  double mean_amp_ratio = 0.0;  // mean rho^2/(lambda*tau) over the tail window
};

// The slow flow as an integrator field.
VectorField ms_field(const ModelParams& p);

// Integration config for capture studies: max_step is a quarter of the local
// oscillation period estimate at tau_end so the envelope is never aliased.
IntegrationConfig ms_capture_config(const ModelParams& p, double tau_end,
                                    double rel_tol = 1e-10, double abs_tol = 1e-12);

// Classifies a trajectory spanning [tau0, tau_max], tau_max >= 4*tau0.
// Singularity-truncated trajectories are Escaped.
CaptureVerdict classify_trajectory(const Trajectory& traj, const ModelParams& p,
                                   const std::vector<EquilibriumPoint>& roots,
                                   const CaptureCriteria& criteria = {});

struct BasinGrid {
  double rho_min = 0.1, rho_max = 1.0;
  std::size_t n_rho = 1;
  double psi_min = 0.0, psi_max = 0.0;
  std::size_t n_psi = 1;

  std::size_t nodes() const { return n_rho * n_psi; }
  double rho_at(std::size_t i) const;
  double psi_at(std::size_t j) const;
};

struct BasinResult {
  BasinGrid grid;
  std::vector<CaptureVerdict> verdicts;  // row-major: rho outer, psi inner
};

BasinResult basin_scan(const ModelParams& p, double tau0, const BasinGrid& grid, double tau_max,
                       const CaptureCriteria& criteria = {}, unsigned workers = 1,
                       double rel_tol = 1e-8, double abs_tol = 1e-10,
                       std::size_t max_steps = 5'000'000);

struct EnvelopeFit {
  bool ok = false;
  std::string refusal;          // reason when ok is false
  std::size_t n_extrema = 0;
  double a = 0.0;               // leading oscillation amplitude
  double phi = 0.0;             // phase constant at the first extremum
  double decay_exponent = 0.0;  // log-log slope of |extrema| vs tau
  double freq_exponent = 0.0;   // log-log slope of local frequency vs tau
  double freq_coeff = 0.0;      // prefactor of the tau^{1/4} frequency law
  double rms_residual = 0.0;    // of the decay fit in log space
};

struct EnvelopeFitOptions {
  std::size_t min_extrema = 20;
  // Extrema before skip_front_factor * t_front are dropped as settle-in.
  double skip_front_factor = 2.0;
};

// Fits the decaying oscillation of psi(tau) - psi*(tau) along a captured
// trajectory spanning at least one decade in tau.
EnvelopeFit fit_envelope(const Trajectory& traj, const ScaledFrame& frame,
                         const EnvelopeFitOptions& opts = {});

struct ThresholdRow {
  double delta = 0.0;
  double psi0 = 0.0;
  double p_prime = 0.0;
  std::string algebraic;  // stable | unstable | degenerate
  std::string dynamic;    // stable | unstable | ambiguous | skipped
  bool agree = false;
};

struct ThresholdSweepOptions {
  double track_psi = 0.0;  // root branch followed by wrapped nearest-distance
  double d0 = 1e-3;
  double tau0 = 1e2;
  double horizon = 4.0;
  double stable_ratio = 2.0;     // dynamic stable: max d/d0 stays below
  double unstable_ratio = 10.0;  // dynamic unstable: max d/d0 reaches
};

std::vector<ThresholdRow> threshold_sweep(double nu, double lambda,
                                          std::span<const double> deltas,
                                          const ThresholdSweepOptions& opts = {},
                                          unsigned workers = 1);

}  // namespace autores
