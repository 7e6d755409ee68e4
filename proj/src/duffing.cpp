#include "autores/duffing.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace autores {

namespace {

double two_pi() { return 2.0 * std::acos(-1.0); }

double wrap_to_period(double x) {
  const double period = two_pi();
  double w = std::fmod(x, period);
  if (w < 0.0) w += period;
  return w;
}

}  // namespace

ReductionResult reduce(const DuffingParams& p) {
  p.validate();
  ReductionResult r;
  r.kappa = std::cbrt(4.0 / (3.0 * p.gamma));
  r.lambda = 8.0 * p.alpha * r.kappa * r.kappa / (p.eps * p.eps);
  r.mu = MuSpec::closed_form(p.beta * std::sqrt(2.0 * r.kappa) / 4.0, 2.0 * r.kappa);
  r.slow_time_scale = p.eps / (2.0 * r.kappa);
  r.mu0 = mu_leading_coeff(r.mu);
  r.delta_model = r.mu0 * std::sqrt(r.lambda);
  r.delta_conclusion = 2.0 * p.beta * std::sqrt(p.alpha) / (p.eps * std::sqrt(3.0 * p.gamma));
  return r;
}

VectorField duffing_field(const DuffingParams& p) {
  return [p](double t, std::span<const double> y, std::span<double> dydt) {
    const auto [du, dv] = duffing_rhs(p, t, y[0], y[1]);
    dydt[0] = du;
    dydt[1] = dv;
  };
}

DuffingObservables observables(const Trajectory& traj, const DuffingParams& p,
                               double sample_dt) {
  if (traj.size() == 0) throw PreconditionError("observables need a non-empty trajectory");
  if (!(sample_dt > 0.0)) throw PreconditionError("sample step must be positive");
  DuffingObservables obs;
  double prev_angle = 0.0;
  double unwrapped = 0.0;
  bool have_prev = false;
  for (double t = traj.t_front();; t += sample_dt) {
    if (t > traj.t_back()) t = traj.t_back();
    const auto y = traj.at(t);
    const double u = y[0], v = y[1];
    if (u == 0.0 && v == 0.0) {
      ++obs.skipped_samples;
    } else {
      const double angle = std::atan2(v, u);
      if (!have_prev) {
        unwrapped = angle;
      } else {
        double step = angle - prev_angle;
        step = std::remainder(step, two_pi());
        unwrapped += step;
      }
      prev_angle = angle;
      have_prev = true;
      const double u2 = u * u;
      obs.t.push_back(t);
      obs.u.push_back(u);
      obs.v.push_back(v);
      obs.energy.push_back(0.5 * u2 - 0.25 * p.gamma * p.eps * u2 * u2 + 0.5 * v * v);
      obs.delta.push_back(duffing_phase(p, t) + unwrapped);
    }
    if (t >= traj.t_back()) break;
  }
  return obs;
}

EnvelopeReport compare_envelope(const DuffingParams& p, double u0, double v0, double t_max,
                                const CompareOptions& opts) {
  p.validate();
  if (!(t_max > 0.0)) throw PreconditionError("t_max must be positive");
  if (!(t_max <= opts.horizon_c / p.eps)) {
    throw PreconditionError("t_max exceeds the configured horizon c/eps");
  }

  EnvelopeReport report;
  report.reduction = reduce(p);

  IntegrationConfig cfg;
  cfg.rel_tol = opts.rel_tol;
  cfg.abs_tol = opts.abs_tol;
  cfg.max_step = 0.25 * two_pi();
  cfg.max_steps = opts.max_steps;
  const Trajectory full = integrate(duffing_field(p), 0.0, {u0, v0}, t_max, cfg);
  const DuffingObservables obs = observables(full, p);
  if (obs.t.size() < 4) throw PreconditionError("trajectory too short for observables");

  double band_lo = 0.0, band_hi = 0.0, band_sum = 0.0;
  std::size_t band_n = 0;
  const double t_half = full.t_back() / 2.0;
  for (std::size_t i = 0; i < obs.t.size(); ++i) {
    report.delta_drift =
        std::max(report.delta_drift, std::abs(obs.delta[i] - obs.delta.front()));
    if (obs.t[i] < t_half) continue;
    if (band_n == 0) {
      band_lo = band_hi = obs.delta[i];
    } else {
      band_lo = std::min(band_lo, obs.delta[i]);
      band_hi = std::max(band_hi, obs.delta[i]);
    }
    band_sum += obs.delta[i];
    ++band_n;
  }
  report.delta_band = band_hi - band_lo;
  report.captured = report.delta_band < two_pi();
  report.psi0_observed = wrap_to_period(band_sum / static_cast<double>(band_n));
  const double e0 = std::max(obs.energy.front(), 1e-300);
  report.energy_final = obs.energy.back();
  report.energy_growth = report.energy_final / e0;
  for (double e : obs.energy) report.energy_max = std::max(report.energy_max, e);

  // Reduced model from the matched initial data at t = 0 (phi(0) = 0):
  // u = kappa*rho*cos(psi - phi), u' ~ kappa*rho*sin(psi - phi)*phi'.
  const ReductionResult& red = report.reduction;
  ModelParams pm;
  pm.lambda = red.lambda;
  pm.nu = p.nu;
  pm.mu = red.mu;
  const double rho0 = std::hypot(u0, v0) / red.kappa;
  const double psi0 = std::atan2(v0, u0);
  const double tau_max = red.slow_time_scale * t_max;
  std::optional<Trajectory> model;
  if (rho0 > pm.rho_floor) {
    IntegrationConfig mcfg = ms_capture_config(pm, std::max(tau_max, 1e-6));
    mcfg.rel_tol = opts.rel_tol;
    mcfg.abs_tol = opts.abs_tol;
    mcfg.max_steps = opts.max_steps;
    model = integrate(ms_field(pm), 0.0, {rho0, psi0}, tau_max, mcfg);
  }
  report.model_ok = model && model->reason() == StopReason::ReachedEnd;

  if (report.captured && report.model_ok) {
    const double window = opts.window_periods * two_pi();
    const double lo = opts.compare_lo / p.eps;
    const double hi = std::min(opts.compare_hi / p.eps, full.t_back());
    for (double start = lo; start + window <= hi; start += window) {
      EnvelopeWindow w;
      w.t_center = start + 0.5 * window;
      const int fine = 128 * static_cast<int>(opts.window_periods);
      double peak_full = 0.0, peak_model = 0.0;
      for (int i = 0; i <= fine; ++i) {
        const double t = start + window * static_cast<double>(i) / fine;
        peak_full = std::max(peak_full, std::abs(full.at(t)[0]));
        peak_model =
            std::max(peak_model, red.kappa * std::abs(model->at(red.slow_time_scale * t)[0]));
      }
      w.env_full = peak_full;
      w.env_model = peak_model;
      w.rel_err = std::abs(w.env_full - w.env_model) / std::abs(w.env_model);
      report.max_rel_env_err = std::max(report.max_rel_env_err, w.rel_err);
      report.windows.push_back(w);
    }
  }
  return report;
}

}  // namespace autores
