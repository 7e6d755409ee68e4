#pragma once
// Adaptive Dormand-Prince 5(4) integration with the free 4th-order dense
// interpolant and sign-change event detection. Every simulation in the
// project runs through this integrator; identical inputs produce
// bit-identical trajectories.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "autores/errors.hpp"

namespace autores {

using VectorField =
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

// Scalar event function; a sign change over an accepted step triggers the
// event and the trajectory is truncated at the located root.
struct Event {
  std::function<double(double t, std::span<const double> y)> value;
  int direction = 0;  // +1: - to +, -1: + to -, 0: either
};

struct IntegrationConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 = choose automatically
  std::size_t max_steps = 5'000'000;
  std::vector<Event> events;
};

enum class StopReason {
  ReachedEnd,     // covered [t0, t1]
  Event,          // truncated at the first event root
  Singularity,    // the vector field signalled a singularity
  StepUnderflow,  // step control could not make progress
};

class Trajectory {
 public:
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return times_.size(); }
  double time(std::size_t i) const { return times_[i]; }
  std::span<const double> state(std::size_t i) const {
    return {states_.data() + i * dim_, dim_};
  }
  const std::vector<double>& times() const { return times_; }
  double t_front() const { return times_.front(); }
  double t_back() const { return times_.back(); }

  // Dense-output evaluation; exact at stored sample times.
  // Throws DomainError outside [t_front, t_back].
  void interpolate_into(double t, std::span<double> out) const;
  std::vector<double> at(double t) const;

  StopReason reason() const { return reason_; }
  bool singular() const { return reason_ == StopReason::Singularity; }
  int event_index() const { return event_index_; }
  std::size_t steps_accepted() const { return steps_accepted_; }
  std::size_t steps_rejected() const { return steps_rejected_; }
  double rel_tol() const { return rel_tol_; }
  double abs_tol() const { return abs_tol_; }

  // Builds a trajectory from explicit samples with linear dense output.
  static Trajectory from_samples(std::size_t dim, std::vector<double> times,
                                 std::vector<double> states);

 private:
  Trajectory() = default;
  std::size_t interval_for(double t) const;

  std::size_t dim_ = 0;
  std::vector<double> times_;
  std::vector<double> states_;     // size() * dim
  std::vector<double> rcont_;      // (size()-1) * 5 * dim interpolation coefficients
  std::vector<double> interval_h_; // full step length behind each interval
  StopReason reason_ = StopReason::ReachedEnd;
  int event_index_ = -1;
  std::size_t steps_accepted_ = 0;
  std::size_t steps_rejected_ = 0;
  double rel_tol_ = 0.0;
  double abs_tol_ = 0.0;

  friend Trajectory integrate(const VectorField&, double, std::vector<double>, double,
                              const IntegrationConfig&);
};

// Integrates y' = f(t, y) over [t0, t1]. The trajectory is truncated early at
// the first event root or when the field signals a singularity; exceeding
// max_steps throws BudgetError.
Trajectory integrate(const VectorField& f, double t0, std::vector<double> y0, double t1,
                     const IntegrationConfig& cfg = {});

inline std::vector<double> interpolate(const Trajectory& traj, double t) { return traj.at(t); }

}  // namespace autores
