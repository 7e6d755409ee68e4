#include "autores/stability.hpp"

#include <cmath>

namespace autores {

namespace {

double two_pi() { return 2.0 * std::acos(-1.0); }

}  // namespace

Mat2 linearization_matrix(const SeriesCoeffs& c, double tau) {
  const ModelState s = eval_series(c, tau);
  const double m = eval_mu(c.params.mu, tau);
  const double nu = c.params.nu;
  const double sin2 = std::sin(2.0 * s.psi + nu);
  const double cos2 = std::cos(2.0 * s.psi + nu);
  Mat2 a;
  a.a11 = -m * sin2;
  a.a12 = std::cos(s.psi) - 2.0 * s.rho * m * cos2;
  a.a21 = 2.0 * s.rho - std::cos(s.psi) / (s.rho * s.rho);
  a.a22 = 2.0 * m * sin2 - std::sin(s.psi) / s.rho;
  return a;
}

Eigenvalues eigenvalues(const Mat2& a) {
  Eigenvalues e;
  e.x = 0.5 * a.trace();
  e.y = e.x * e.x - a.det();
  if (e.y >= 0.0) {
    const double root = std::sqrt(e.y);
    e.plus = {e.x + root, 0.0};
    e.minus = {e.x - root, 0.0};
  } else {
    const double root = std::sqrt(-e.y);
    e.plus = {e.x, root};
    e.minus = {e.x, -root};
  }
  return e;
}

ScaledFrame ScaledFrame::make(const SeriesCoeffs& c) {
  if (!(c.p_prime > kDegeneracyTol)) {
    throw PreconditionError("scaled frame exists only for stable roots (P'(psi0) > 0)");
  }
  ScaledFrame f;
  f.series_ = c;
  f.omega0_ = std::sqrt(c.p_prime) * std::pow(4.0 * c.params.lambda, -0.25);
  return f;
}

double ScaledFrame::eta_of_tau(double tau) const {
  if (!(tau > 0.0)) throw DomainError("the scaled frame requires tau > 0");
  return varkappa_ * std::pow(tau, 1.25);
}

double ScaledFrame::tau_of_eta(double eta) const {
  if (!(eta > 0.0)) throw DomainError("the scaled frame requires eta > 0");
  return std::pow(eta / varkappa_, 0.8);
}

ScaledPoint ScaledFrame::to_scaled(double tau, const ModelState& s) const {
  const ModelState ref = eval_series(series_, tau);
  ScaledPoint p;
  p.r = (s.rho - ref.rho) * std::pow(tau, 0.25) / omega0_;
  p.psi = s.psi - ref.psi;
  p.eta = eta_of_tau(tau);
  p.d = std::hypot(p.r, p.psi);
  return p;
}

std::pair<double, ModelState> ScaledFrame::from_scaled(const ScaledPoint& p) const {
  const double tau = tau_of_eta(p.eta);
  const ModelState ref = eval_series(series_, tau);
  return {tau, ModelState{ref.rho + omega0_ * std::pow(tau, -0.25) * p.r, ref.psi + p.psi}};
}

double ScaledFrame::linear_frequency() const {
  return 2.0 * omega0_ * std::sqrt(series_.params.lambda);
}

double int_p(double psi0, double delta, double nu, double big_psi) {
  return -0.5 * delta * (std::cos(2.0 * psi0 + 2.0 * big_psi + nu) - std::cos(2.0 * psi0 + nu)) +
         std::cos(psi0 + big_psi) - std::cos(psi0);
}

double hamiltonian_h0(const ScaledFrame& f, double r, double big_psi) {
  const SeriesCoeffs& c = f.series();
  return f.omega0() * std::sqrt(c.params.lambda) * r * r +
         int_p(c.psi0, f.delta(), c.params.nu, big_psi) / f.omega0();
}

double hamiltonian_h(const ScaledFrame& f, double r, double big_psi, double eta) {
  const SeriesCoeffs& c = f.series();
  const double tau = f.tau_of_eta(eta);
  const ModelState ref = eval_series(c, tau);
  const double m = eval_mu(c.params.mu, tau);
  const double w0 = f.omega0();
  const double kappa = f.varkappa();
  const double nu = c.params.nu;

  const double cos_shift = std::cos(2.0 * ref.psi + 2.0 * big_psi + nu);
  const double cos_base = std::cos(2.0 * ref.psi + nu);
  const double sin_base = std::sin(2.0 * ref.psi + nu);

  double h = w0 * std::pow(kappa, 0.4) * std::pow(eta, -0.4) * ref.rho * r * r;
  h += (std::cos(ref.psi + big_psi) - std::cos(ref.psi) + big_psi * std::sin(ref.psi)) / w0;
  h += w0 * w0 * std::pow(kappa, 0.6) * std::pow(eta, -0.6) * r * r * r / 3.0;
  h -= r * big_psi / (5.0 * eta);
  h -= 0.5 * m * ref.rho / w0 * (cos_shift - cos_base - 2.0 * big_psi * sin_base);
  h -= 0.5 * std::pow(kappa, 0.2) * m * std::pow(eta, -0.2) * (cos_shift - cos_base) * r;
  return h;
}

double lyapunov_v(const ScaledFrame& f, double r, double big_psi, double eta) {
  const SeriesCoeffs& c = f.series();
  const double w0 = f.omega0();
  const double sqrt_lambda = std::sqrt(c.params.lambda);
  const double kappa = f.varkappa();
  const double v1 =
      std::pow(kappa, 0.6) * r *
      (2.0 * w0 * w0 * r * r / 3.0 +
       int_p(c.psi0, f.delta(), c.params.nu, big_psi) / sqrt_lambda);
  const double v2 = -r * big_psi / 10.0;
  return (hamiltonian_h(f, r, big_psi, eta) + v1 * std::pow(eta, -0.6) + v2 / eta) /
         (w0 * sqrt_lambda);
}

std::vector<LyapunovSample> lyapunov_along(const Trajectory& traj, const ScaledFrame& f,
                                           double eta_lo, double eta_hi,
                                           std::size_t n_samples) {
  if (!(eta_hi > eta_lo) || n_samples < 2) {
    throw PreconditionError("lyapunov_along needs eta_hi > eta_lo and >= 2 samples");
  }
  // Centered difference across half the oscillation period: sin(k*pi) = 0 for
  // every harmonic, so the period comb injected by the truncated-series frame
  // cancels and the difference measures the secular derivative of V.
  const double fd_step = 0.5 * two_pi() / f.linear_frequency();
  const double tau_lo_needed = f.tau_of_eta(eta_lo - fd_step);
  const double tau_hi_needed = f.tau_of_eta(eta_hi + fd_step);
  if (tau_lo_needed < traj.t_front() || tau_hi_needed > traj.t_back()) {
    throw PreconditionError("trajectory does not cover the requested eta range");
  }

  auto point_at = [&](double eta) {
    const double tau = f.tau_of_eta(eta);
    const auto y = traj.at(tau);
    return f.to_scaled(tau, ModelState{y[0], y[1]});
  };
  auto v_at = [&](double eta) {
    const ScaledPoint p = point_at(eta);
    return lyapunov_v(f, p.r, p.psi, p.eta);
  };

  std::vector<LyapunovSample> samples(n_samples);
  const double step = (eta_hi - eta_lo) / static_cast<double>(n_samples - 1);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double eta = eta_lo + step * static_cast<double>(i);
    const ScaledPoint p = point_at(eta);
    const double dv = (v_at(eta + fd_step) - v_at(eta - fd_step)) / (2.0 * fd_step);
    samples[i] = LyapunovSample{eta, p.r, p.psi, p.d, lyapunov_v(f, p.r, p.psi, p.eta), dv};
  }
  return samples;
}

namespace {

// dR/deta = -dH0/dPsi, dPsi/deta = dH0/dR for the frozen Hamiltonian.
VectorField frozen_field(const ScaledFrame& f) {
  const SeriesCoeffs c = f.series();
  const double w0 = f.omega0();
  const double delta = f.delta();
  const double two_w0_sqrt_lambda = f.linear_frequency();
  return [c, w0, delta, two_w0_sqrt_lambda](double, std::span<const double> y,
                                            std::span<double> dydt) {
    const PhaseParams pp{delta, c.params.nu};
    dydt[0] = -p_eval(c.psi0 + y[1], pp, 0) / w0;
    dydt[1] = two_w0_sqrt_lambda * y[0];
  };
}

// First-return time of the frozen orbit through (R0, 0); 0 when no return
// happens within the eta budget.
double frozen_return_time(const ScaledFrame& f, double h, double budget_periods) {
  const double r0 = std::sqrt(h / (f.omega0() * std::sqrt(f.lambda())));
  const double linear_period = two_pi() / f.linear_frequency();
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.max_step = 0.25 * linear_period;
  Event return_event;
  return_event.value = [](double, std::span<const double> y) { return y[1]; };
  return_event.direction = +1;
  cfg.events.push_back(return_event);
  const Trajectory traj =
      integrate(frozen_field(f), 0.0, {r0, 0.0}, budget_periods * linear_period, cfg);
  if (traj.reason() != StopReason::Event) return 0.0;
  return traj.t_back();
}

}  // namespace

double frozen_frequency(const ScaledFrame& f, double h) {
  if (!(h > 0.0)) throw DomainError("frozen orbit energy must be positive");
  const double t = frozen_return_time(f, h, 50.0);
  if (t <= 0.0) throw DomainError("h lies outside the closed-orbit region of the frozen flow");
  return two_pi() / t;
}

double omega_formula(const ScaledFrame& f, double h) {
  const SeriesCoeffs& c = f.series();
  return f.linear_frequency() +
         h * c.p_triple_prime / (16.0 * f.omega0() * f.omega0() * std::sqrt(c.params.lambda));
}

double find_frozen_h0(const ScaledFrame& f) {
  double hi = f.omega0() * std::sqrt(f.lambda());  // energy of the unit-R orbit
  int shrink = 0;
  while (frozen_return_time(f, hi, 50.0) <= 0.0) {
    hi *= 0.5;
    if (++shrink > 60) throw PreconditionError("no closed frozen orbit found at any energy");
  }
  for (int it = 0; it < 60; ++it) {
    if (frozen_return_time(f, 2.0 * hi, 50.0) <= 0.0) break;
    hi *= 2.0;
    if (hi > 1e8) throw PreconditionError("frozen flow appears closed at every energy");
  }
  double lo = hi;
  hi = 2.0 * hi;
  for (int it = 0; it < 60 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (frozen_return_time(f, mid, 50.0) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PerturbationWitness run_perturbation_witness(const ModelParams& p, double psi0, double d0,
                                             double tau0, double horizon, double rel_tol,
                                             double abs_tol) {
  if (!(d0 > 0.0) || !(tau0 > 0.0) || !(horizon > 1.0)) {
    throw PreconditionError("witness needs d0 > 0, tau0 > 0, horizon > 1");
  }
  const SeriesCoeffs c = compute_coeffs(p, psi0);
  // |P'| keeps the frame usable on both sides of the stability boundary.
  const double w0 = std::sqrt(std::abs(c.p_prime)) * std::pow(4.0 * p.lambda, -0.25);
  const double tau1 = horizon * tau0;

  // Shadow pair: the truncated series misses the exact particular solution by
  // its tail (large near a fold, where the coefficients scale like 1/P');
  // measuring the perturbed run against an unperturbed partner started from
  // the same series point cancels that common offset.
  const ModelState ref0 = eval_series(c, tau0);
  const ModelState pert0{ref0.rho + w0 * std::pow(tau0, -0.25) * d0 / std::sqrt(2.0),
                         ref0.psi + d0 / std::sqrt(2.0)};

  IntegrationConfig cfg;
  cfg.rel_tol = rel_tol;
  cfg.abs_tol = abs_tol;
  cfg.max_step =
      0.25 * two_pi() / (2.0 * w0 * std::sqrt(p.lambda) * std::pow(tau1, 0.25));
  const VectorField field = [&p](double t, std::span<const double> y, std::span<double> dydt) {
    const ModelDeriv d = model_rhs(p, t, ModelState{y[0], y[1]});
    dydt[0] = d.drho;
    dydt[1] = d.dpsi;
  };
  const Trajectory reference = integrate(field, tau0, {ref0.rho, ref0.psi}, tau1, cfg);
  const Trajectory perturbed = integrate(field, tau0, {pert0.rho, pert0.psi}, tau1, cfg);

  PerturbationWitness w;
  w.singular = reference.singular() || perturbed.singular();
  const double tau_end = std::min(reference.t_back(), perturbed.t_back());
  const std::size_t n = 2048;
  std::vector<double> ya(2), yb(2);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau =
        tau0 + (tau_end - tau0) * static_cast<double>(i) / static_cast<double>(n - 1);
    reference.interpolate_into(tau, ya);
    perturbed.interpolate_into(tau, yb);
    const double dr = (yb[0] - ya[0]) * std::pow(tau, 0.25) / w0;
    const double dpsi = yb[1] - ya[1];
    const double ratio = std::hypot(dr, dpsi) / d0;
    w.max_ratio = std::max(w.max_ratio, ratio);
    w.final_ratio = ratio;
  }
  return w;
}

}  // namespace autores
