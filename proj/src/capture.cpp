#include "autores/capture.hpp"

#include <algorithm>
#include <cmath>

#include "autores/parallel.hpp"

namespace autores {

namespace {

double two_pi() { return 2.0 * std::acos(-1.0); }

double wrap_to_pi(double x) {
  const double period = two_pi();
  double w = std::fmod(x + period / 2.0, period);
  if (w < 0.0) w += period;
  return w - period / 2.0;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

// Golden-section maximization of |g| on [a, b].
double maximize_abs(const std::function<double(double)>& g, double a, double b) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = std::abs(g(c));
  double fd = std::abs(g(d));
  for (int it = 0; it < 80 && (b - a) > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = std::abs(g(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = std::abs(g(d));
    }
  }
  return 0.5 * (a + b);
}

double bisect_zero(const std::function<double(double)>& g, double a, double b, double ga) {
  for (int it = 0; it < 80 && (b - a) > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
    const double mid = 0.5 * (a + b);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (ga < 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Captured: return "captured";
    case VerdictKind::Escaped: return "escaped";
    case VerdictKind::Undetermined: return "undetermined";
  }
  return "?";
}

VectorField ms_field(const ModelParams& p) {
  return [p](double t, std::span<const double> y, std::span<double> dydt) {
    const ModelDeriv d = model_rhs(p, t, ModelState{y[0], y[1]});
    dydt[0] = d.drho;
    dydt[1] = d.dpsi;
  };
}

IntegrationConfig ms_capture_config(const ModelParams& p, double tau_end, double rel_tol,
                                    double abs_tol) {
  IntegrationConfig cfg;
  cfg.rel_tol = rel_tol;
  cfg.abs_tol = abs_tol;
  // Quarter of the local oscillation period 2*pi/(2*omega0*lambda^{1/2}*tau^{1/4})
  // at the far end; P' of order one is the generic scale.
  const double lambda = std::abs(p.lambda);
  const double omega0 = std::pow(4.0 * lambda, -0.25);
  if (tau_end > 0.0 && lambda > 0.0) {
    cfg.max_step =
        0.25 * two_pi() / (2.0 * omega0 * std::sqrt(lambda) * std::pow(tau_end, 0.25));
  }
  return cfg;
}

CaptureVerdict classify_trajectory(const Trajectory& traj, const ModelParams& p,
                                   const std::vector<EquilibriumPoint>& roots,
                                   const CaptureCriteria& criteria) {
  CaptureVerdict v;
  v.final_tau = traj.t_back();
  if (traj.singular()) {
    v.kind = VerdictKind::Escaped;
    return v;
  }
  const double tau0 = traj.t_front();
  const double tau_max = traj.t_back();
  if (!(tau_max >= 4.0 * tau0)) {
    throw PreconditionError("classification needs a trajectory spanning tau_max >= 4*tau0");
  }

  const double tail_start = 0.5 * tau_max;
  const std::size_t n = std::max<std::size_t>(criteria.tail_samples, 2);
  std::vector<double> taus(n), rhos(n), psis(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = tail_start + (tau_max - tail_start) * static_cast<double>(i) /
                                      static_cast<double>(n - 1);
    const auto y = traj.at(t);
    taus[i] = t;
    rhos[i] = y[0];
    psis[i] = y[1];
  }

  double amp_sum = 0.0;
  bool amp_in_band = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = rhos[i] * rhos[i] / (p.lambda * taus[i]);
    amp_sum += ratio;
    if (ratio < criteria.amp_band_lo || ratio > criteria.amp_band_hi) amp_in_band = false;
  }
  v.mean_amp_ratio = amp_sum / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    v.max_drift = std::max(v.max_drift, std::abs(psis[i] - psis.front()));
  }

  if (amp_in_band) {
    for (std::size_t r = 0; r < roots.size(); ++r) {
      if (roots[r].stability != Stability::Stable) continue;
      bool locked = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(wrap_to_pi(psis[i] - roots[r].psi0)) >= criteria.phase_window) {
          locked = false;
          break;
        }
      }
      if (locked) {
        v.kind = VerdictKind::Captured;
        v.psi0_index = static_cast<int>(r);
        v.psi0_value = roots[r].psi0;
        return v;
      }
    }
  }

  const double half_drift = std::abs(psis.back() - psis.front());
  if (half_drift > criteria.drift_limit || v.mean_amp_ratio < criteria.collapse_mean) {
    v.kind = VerdictKind::Escaped;
    return v;
  }
  v.kind = VerdictKind::Undetermined;
  return v;
}

double BasinGrid::rho_at(std::size_t i) const {
  if (n_rho == 1) return rho_min;
  return rho_min + (rho_max - rho_min) * static_cast<double>(i) / static_cast<double>(n_rho - 1);
}

double BasinGrid::psi_at(std::size_t j) const {
  if (n_psi == 1) return psi_min;
  return psi_min + (psi_max - psi_min) * static_cast<double>(j) / static_cast<double>(n_psi - 1);
}

BasinResult basin_scan(const ModelParams& p, double tau0, const BasinGrid& grid, double tau_max,
                       const CaptureCriteria& criteria, unsigned workers, double rel_tol,
                       double abs_tol, std::size_t max_steps) {
  p.validate();
  if (!(p.lambda > 0.0)) throw PreconditionError("capture studies require lambda > 0");
  if (grid.n_rho < 1 || grid.n_psi < 1) throw PreconditionError("basin grid must be non-empty");
  if (!(tau_max >= 4.0 * tau0) || !(tau0 > 0.0)) {
    throw PreconditionError("basin scan needs tau0 > 0 and tau_max >= 4*tau0");
  }
  for (std::size_t i = 0; i < grid.n_rho; ++i) {
    if (!(grid.rho_at(i) > p.rho_floor)) {
      throw PreconditionError("basin grid amplitudes must exceed the rho floor");
    }
  }

  const auto roots = find_roots(PhaseParams::from_model(p));
  const VectorField field = ms_field(p);
  IntegrationConfig cfg = ms_capture_config(p, tau_max, rel_tol, abs_tol);
  cfg.max_steps = max_steps;

  BasinResult result;
  result.grid = grid;
  result.verdicts.resize(grid.nodes());
  parallel_for(grid.nodes(), workers, [&](std::size_t idx) {
    const std::size_t i = idx / grid.n_psi;
    const std::size_t j = idx % grid.n_psi;
    const Trajectory traj =
        integrate(field, tau0, {grid.rho_at(i), grid.psi_at(j)}, tau_max, cfg);
    result.verdicts[idx] = classify_trajectory(traj, p, roots, criteria);
  });
  return result;
}

EnvelopeFit fit_envelope(const Trajectory& traj, const ScaledFrame& frame,
                         const EnvelopeFitOptions& opts) {
  if (!(traj.t_back() >= 10.0 * traj.t_front())) {
    throw PreconditionError("envelope fit needs a trajectory spanning at least one decade");
  }
  EnvelopeFit fit;

  const SeriesCoeffs& c = frame.series();
  auto psi_dev = [&](double tau) {
    const auto y = traj.at(tau);
    return y[1] - eval_series(c, tau).psi;
  };

  // Zero crossings of psi - psi*, refined on the dense output.
  const double t_min = std::max(traj.t_front(), opts.skip_front_factor * traj.t_front());
  std::vector<double> crossings;
  double prev_t = 0.0, prev_g = 0.0;
  bool have_prev = false;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.time(i);
    if (t < t_min) continue;
    const double g = traj.state(i)[1] - eval_series(c, t).psi;
    if (have_prev && prev_g != 0.0 && (prev_g < 0.0) != (g < 0.0)) {
      crossings.push_back(bisect_zero(psi_dev, prev_t, t, prev_g));
    }
    prev_t = t;
    prev_g = g;
    have_prev = true;
  }

  std::vector<double> ext_tau, ext_val;
  for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
    const double t = maximize_abs(psi_dev, crossings[i], crossings[i + 1]);
    ext_tau.push_back(t);
    ext_val.push_back(psi_dev(t));
  }
  fit.n_extrema = ext_tau.size();
  if (ext_tau.size() < opts.min_extrema) {
    fit.refusal = "too few extrema for a fit";
    return fit;
  }

  std::vector<double> log_t(ext_tau.size()), log_a(ext_tau.size());
  for (std::size_t i = 0; i < ext_tau.size(); ++i) {
    log_t[i] = std::log(ext_tau[i]);
    log_a[i] = std::log(std::abs(ext_val[i]));
  }
  const LinearFit decay = least_squares(log_t, log_a);
  fit.decay_exponent = decay.slope;
  fit.rms_residual = decay.rms;

  // Consecutive crossings are half a period apart; regress the local
  // frequency against tau and pin the exponent-1/4 prefactor separately.
  std::vector<double> log_tm, log_w, coeff_terms;
  for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
    const double dt = crossings[i + 1] - crossings[i];
    const double tm = 0.5 * (crossings[i] + crossings[i + 1]);
    const double w = std::acos(-1.0) / dt;
    log_tm.push_back(std::log(tm));
    log_w.push_back(std::log(w));
    coeff_terms.push_back(std::log(w) - 0.25 * std::log(tm));
  }
  const LinearFit freq = least_squares(log_tm, log_w);
  fit.freq_exponent = freq.slope;
  double mean_coeff = 0.0;
  for (double v : coeff_terms) mean_coeff += v;
  fit.freq_coeff = std::exp(mean_coeff / static_cast<double>(coeff_terms.size()));

  // Leading amplitude and phase from the first extremum: the oscillation is
  // a * tau^{-1/8} * sin(S) with S ~ (8 omega0/5) lambda^{1/2} tau^{5/4} + phi.
  const double t1 = ext_tau.front();
  fit.a = std::abs(ext_val.front()) * std::pow(t1, 0.125);
  const double s_growth =
      1.6 * frame.omega0() * std::sqrt(frame.lambda()) * std::pow(t1, 1.25);
  const double target = ext_val.front() > 0.0 ? 0.5 * std::acos(-1.0) : 1.5 * std::acos(-1.0);
  fit.phi = wrap_to_pi(target - s_growth);
  fit.ok = true;
  return fit;
}

std::vector<ThresholdRow> threshold_sweep(double nu, double lambda,
                                          std::span<const double> deltas,
                                          const ThresholdSweepOptions& opts, unsigned workers) {
  if (!(lambda > 0.0)) throw PreconditionError("threshold sweep requires lambda > 0");
  std::vector<ThresholdRow> rows(deltas.size());
  parallel_for(deltas.size(), workers, [&](std::size_t i) {
    const double delta = deltas[i];
    ThresholdRow& row = rows[i];
    row.delta = delta;
    const PhaseParams pp{delta, nu};
    const auto roots = find_roots(pp);
    if (roots.empty()) {
      row.algebraic = "none";
      row.dynamic = "skipped";
      return;
    }
    std::size_t best = 0;
    double best_dist = std::abs(wrap_to_pi(roots[0].psi0 - opts.track_psi));
    for (std::size_t r = 1; r < roots.size(); ++r) {
      const double dist = std::abs(wrap_to_pi(roots[r].psi0 - opts.track_psi));
      if (dist < best_dist) {
        best = r;
        best_dist = dist;
      }
    }
    const EquilibriumPoint& root = roots[best];
    row.psi0 = root.psi0;
    row.p_prime = root.p_prime;
    row.algebraic = to_string(root.stability);
    if (root.stability == Stability::Degenerate) {
      row.dynamic = "skipped";
      row.agree = false;
      return;
    }
    ModelParams p;
    p.lambda = lambda;
    p.nu = nu;
    p.mu = MuSpec::series({delta / std::sqrt(lambda)});
    const PerturbationWitness w =
        run_perturbation_witness(p, root.psi0, opts.d0, opts.tau0, opts.horizon);
    if (w.max_ratio >= opts.unstable_ratio || w.singular) {
      row.dynamic = "unstable";
    } else if (w.max_ratio < opts.stable_ratio) {
      row.dynamic = "stable";
    } else {
      row.dynamic = "ambiguous";
    }
    row.agree = row.dynamic == row.algebraic;
  });
  return rows;
}

}  // namespace autores
