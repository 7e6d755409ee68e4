#include "autores/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace autores {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC2 = 1.0 / 5.0;
constexpr double kC3 = 3.0 / 10.0;
constexpr double kC4 = 4.0 / 5.0;
constexpr double kC5 = 8.0 / 9.0;

constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0, kA53 = 64448.0 / 6561.0,
                 kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

// Weights of the 4th-order continuous extension.
constexpr double kD1 = -12715105075.0 / 11282082432.0;
constexpr double kD3 = 87487479700.0 / 32700410799.0;
constexpr double kD4 = -10690763975.0 / 1880347072.0;
constexpr double kD5 = 701980252875.0 / 199316789632.0;
constexpr double kD6 = -1453857185.0 / 822651844.0;
constexpr double kD7 = 69997945.0 / 29380423.0;

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void dense_eval(std::span<const double> rcont, std::size_t dim, double theta,
                std::span<double> out) {
  const double th1 = 1.0 - theta;
  for (std::size_t i = 0; i < dim; ++i) {
    const double r1 = rcont[i];
    const double r2 = rcont[dim + i];
    const double r3 = rcont[2 * dim + i];
    const double r4 = rcont[3 * dim + i];
    const double r5 = rcont[4 * dim + i];
    out[i] = r1 + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)));
  }
}

struct StageWorkspace {
  explicit StageWorkspace(std::size_t n) : y_stage(n), y_next(n), err(n) {
    for (auto& s : k) s.assign(n, 0.0);
  }
  std::array<std::vector<double>, 7> k;
  std::vector<double> y_stage;
  std::vector<double> y_next;
  std::vector<double> err;
};

// Hairer-style automatic initial step size.
double initial_step_guess(const VectorField& f, double t0, std::span<const double> y0,
                          std::span<const double> f0, double t1, const IntegrationConfig& cfg) {
  const std::size_t n = y0.size();
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
    dnf += (f0[i] / sc) * (f0[i] / sc);
    dny += (y0[i] / sc) * (y0[i] / sc);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min({h, t1 - t0, cfg.max_step});

  std::vector<double> y1(n), f1(n);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h * f0[i];
  double der2 = 0.0;
  bool probed = false;
  try {
    f(t0 + h, y1, f1);
    if (all_finite(f1)) {
      for (std::size_t i = 0; i < n; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        der2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
      }
      der2 = std::sqrt(der2) / h;
      probed = true;
    }
  } catch (const SingularityError&) {
  } catch (const DomainError&) {
  }
  if (!probed) return std::min({h * 1e-2, t1 - t0, cfg.max_step});

  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3)
                                     : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, t1 - t0, cfg.max_step});
}

}  // namespace

std::size_t Trajectory::interval_for(double t) const {
  const double lo = times_.front();
  const double hi = times_.back();
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (t < lo - slack || t > hi + slack) {
    throw DomainError("interpolation time outside the trajectory span");
  }
  if (t <= lo) return 0;
  if (t >= hi) return times_.size() - 2;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

void Trajectory::interpolate_into(double t, std::span<double> out) const {
  if (times_.size() == 1) {
    if (t != times_.front()) throw DomainError("interpolation time outside the trajectory span");
    std::copy_n(states_.begin(), dim_, out.begin());
    return;
  }
  const std::size_t i = interval_for(t);
  // Stored samples are reproduced exactly.
  if (t == times_[i]) {
    std::copy_n(states_.begin() + static_cast<std::ptrdiff_t>(i * dim_), dim_, out.begin());
    return;
  }
  if (t == times_[i + 1]) {
    std::copy_n(states_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim_), dim_, out.begin());
    return;
  }
  const double theta = (t - times_[i]) / interval_h_[i];
  dense_eval({rcont_.data() + i * 5 * dim_, 5 * dim_}, dim_, theta, out);
}

std::vector<double> Trajectory::at(double t) const {
  std::vector<double> out(dim_);
  interpolate_into(t, out);
  return out;
}

Trajectory Trajectory::from_samples(std::size_t dim, std::vector<double> times,
                                    std::vector<double> states) {
  if (dim == 0 || times.size() < 2 || states.size() != times.size() * dim) {
    throw PreconditionError("from_samples needs >= 2 samples of consistent dimension");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw PreconditionError("sample times must strictly increase");
  }
  Trajectory traj;
  traj.dim_ = dim;
  traj.times_ = std::move(times);
  traj.states_ = std::move(states);
  const std::size_t m = traj.times_.size() - 1;
  traj.rcont_.assign(m * 5 * dim, 0.0);
  traj.interval_h_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    traj.interval_h_[i] = traj.times_[i + 1] - traj.times_[i];
    double* rc = traj.rcont_.data() + i * 5 * dim;
    for (std::size_t j = 0; j < dim; ++j) {
      rc[j] = traj.states_[i * dim + j];
      rc[dim + j] = traj.states_[(i + 1) * dim + j] - traj.states_[i * dim + j];
    }
  }
  return traj;
}

Trajectory integrate(const VectorField& f, double t0, std::vector<double> y0, double t1,
                     const IntegrationConfig& cfg) {
  if (!(t1 > t0)) throw PreconditionError("integration requires t1 > t0");
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) {
    throw PreconditionError("tolerances must be positive");
  }
  if (cfg.max_steps < 1) throw PreconditionError("max_steps must be at least 1");
  if (!(cfg.max_step > 0.0)) throw PreconditionError("max_step must be positive");
  if (!all_finite(y0)) throw PreconditionError("initial state must be finite");
  const std::size_t n = y0.size();
  if (n == 0) throw PreconditionError("state must be non-empty");

  Trajectory traj;
  traj.dim_ = n;
  traj.rel_tol_ = cfg.rel_tol;
  traj.abs_tol_ = cfg.abs_tol;
  traj.times_.push_back(t0);
  traj.states_.insert(traj.states_.end(), y0.begin(), y0.end());

  StageWorkspace ws(n);
  std::vector<double> y = std::move(y0);
  f(t0, y, ws.k[0]);  // FSAL seed; initial-state singularities propagate to the caller
  if (!all_finite(ws.k[0])) throw PreconditionError("vector field not finite at the initial state");

  double t = t0;
  double h = cfg.initial_step > 0.0
                 ? std::min({cfg.initial_step, cfg.max_step, t1 - t0})
                 : initial_step_guess(f, t0, y, ws.k[0], t1, cfg);
  h = std::max(h, 1e-300);

  bool last_rejected = false;
  bool singular_pending = false;
  std::size_t attempts = 0;
  StopReason reason = StopReason::ReachedEnd;
  std::vector<double> g_prev(cfg.events.size()), g_next(cfg.events.size());
  std::vector<double> dense_tmp(n);
  bool have_g_prev = false;

  while (t < t1) {
    if (++attempts > cfg.max_steps) {
      throw BudgetError("integration exceeded the step budget");
    }
    h = std::min(h, cfg.max_step);
    bool final_step = false;
    if (t + h >= t1) {
      h = t1 - t;
      final_step = true;
    }
    const double h_floor =
        16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
    if (h < h_floor) {
      reason = singular_pending ? StopReason::Singularity : StopReason::StepUnderflow;
      break;
    }

    // Stages 2..6, the 5th-order result, and the FSAL stage 7.
    bool stage_failed = false;
    try {
      auto& k = ws.k;
      auto& ys = ws.y_stage;
      for (std::size_t i = 0; i < n; ++i) ys[i] = y[i] + h * kA21 * k[0][i];
      f(t + kC2 * h, ys, k[1]);
      for (std::size_t i = 0; i < n; ++i) ys[i] = y[i] + h * (kA31 * k[0][i] + kA32 * k[1][i]);
      f(t + kC3 * h, ys, k[2]);
      for (std::size_t i = 0; i < n; ++i) {
        ys[i] = y[i] + h * (kA41 * k[0][i] + kA42 * k[1][i] + kA43 * k[2][i]);
      }
      f(t + kC4 * h, ys, k[3]);
      for (std::size_t i = 0; i < n; ++i) {
        ys[i] = y[i] + h * (kA51 * k[0][i] + kA52 * k[1][i] + kA53 * k[2][i] + kA54 * k[3][i]);
      }
      f(t + kC5 * h, ys, k[4]);
      for (std::size_t i = 0; i < n; ++i) {
        ys[i] = y[i] + h * (kA61 * k[0][i] + kA62 * k[1][i] + kA63 * k[2][i] + kA64 * k[3][i] +
                            kA65 * k[4][i]);
      }
      f(t + h, ys, k[5]);
      for (std::size_t i = 0; i < n; ++i) {
        ws.y_next[i] = y[i] + h * (kB1 * k[0][i] + kB3 * k[2][i] + kB4 * k[3][i] +
                                   kB5 * k[4][i] + kB6 * k[5][i]);
      }
      f(t + h, ws.y_next, k[6]);
    } catch (const SingularityError&) {
      stage_failed = true;
      singular_pending = true;
    }
    if (stage_failed) {
      ++traj.steps_rejected_;
      last_rejected = true;
      h *= 0.5;
      continue;
    }

    double err_norm = 0.0;
    bool finite_step = all_finite(ws.y_next);
    if (finite_step) {
      for (std::size_t i = 0; i < n; ++i) {
        const double e = h * (kE1 * ws.k[0][i] + kE3 * ws.k[2][i] + kE4 * ws.k[3][i] +
                              kE5 * ws.k[4][i] + kE6 * ws.k[5][i] + kE7 * ws.k[6][i]);
        const double sc =
            cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ws.y_next[i]));
        err_norm += (e / sc) * (e / sc);
      }
      err_norm = std::sqrt(err_norm / static_cast<double>(n));
      finite_step = std::isfinite(err_norm);
    }
    if (!finite_step) {
      ++traj.steps_rejected_;
      last_rejected = true;
      singular_pending = false;
      h *= 0.25;
      continue;
    }

    if (err_norm > 1.0) {
      ++traj.steps_rejected_;
      last_rejected = true;
      h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      continue;
    }

    // Accepted: record the sample and the dense-output coefficients.
    ++traj.steps_accepted_;
    const double t_next = final_step ? t1 : t + h;
    const std::size_t iv = traj.interval_h_.size();
    traj.interval_h_.push_back(h);
    traj.rcont_.resize((iv + 1) * 5 * n);
    double* rc = traj.rcont_.data() + iv * 5 * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double dy = ws.y_next[i] - y[i];
      const double bspl = h * ws.k[0][i] - dy;
      rc[i] = y[i];
      rc[n + i] = dy;
      rc[2 * n + i] = bspl;
      rc[3 * n + i] = dy - h * ws.k[6][i] - bspl;
      rc[4 * n + i] = h * (kD1 * ws.k[0][i] + kD3 * ws.k[2][i] + kD4 * ws.k[3][i] +
                           kD5 * ws.k[4][i] + kD6 * ws.k[5][i] + kD7 * ws.k[6][i]);
    }
    traj.times_.push_back(t_next);
    traj.states_.insert(traj.states_.end(), ws.y_next.begin(), ws.y_next.end());

    // Event scan over the accepted step.
    if (!cfg.events.empty()) {
      if (!have_g_prev) {
        for (std::size_t e = 0; e < cfg.events.size(); ++e) g_prev[e] = cfg.events[e].value(t, y);
        have_g_prev = true;
      }
      double best_theta = 2.0;
      int best_event = -1;
      for (std::size_t e = 0; e < cfg.events.size(); ++e) {
        g_next[e] = cfg.events[e].value(t_next, ws.y_next);
        const double g0 = g_prev[e];
        const double g1 = g_next[e];
        const int dir = cfg.events[e].direction;
        const bool crossing = (g0 < 0.0 && g1 >= 0.0 && dir >= 0) ||
                              (g0 > 0.0 && g1 <= 0.0 && dir <= 0);
        if (!crossing) continue;
        double a = 0.0, b = 1.0;
        double ga = g0;
        for (int it = 0; it < 80 && (b - a) * h > 1e-15 * std::max(1.0, std::abs(t)); ++it) {
          const double mid = 0.5 * (a + b);
          dense_eval({rc, 5 * n}, n, mid, dense_tmp);
          const double gm = cfg.events[e].value(t + mid * h, dense_tmp);
          if ((ga < 0.0) == (gm < 0.0) && gm != 0.0) {
            a = mid;
            ga = gm;
          } else {
            b = mid;
          }
        }
        const double theta_e = 0.5 * (a + b);
        if (theta_e < best_theta) {
          best_theta = theta_e;
          best_event = static_cast<int>(e);
        }
      }
      if (best_event >= 0) {
        const double t_event = t + best_theta * h;
        dense_eval({rc, 5 * n}, n, best_theta, dense_tmp);
        traj.times_.back() = t_event;
        std::copy(dense_tmp.begin(), dense_tmp.end(),
                  traj.states_.begin() + static_cast<std::ptrdiff_t>(iv * n + n));
        traj.event_index_ = best_event;
        reason = StopReason::Event;
        break;
      }
      std::swap(g_prev, g_next);
    }

    t = t_next;
    y.swap(ws.y_next);
    ws.k[0].swap(ws.k[6]);
    singular_pending = false;
    double fac = (err_norm == 0.0) ? 10.0 : 0.9 * std::pow(err_norm, -0.2);
    fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
    h *= fac;
    last_rejected = false;
  }

  traj.reason_ = reason;
  return traj;
}

}  // namespace autores
