#include <cmath>
#include <vector>

#include "autores/integrator.hpp"
#include "autores/model.hpp"
#include "doctest.h"

using namespace autores;

namespace {

const double kPi = std::acos(-1.0);

void harmonic(double, std::span<const double> y, std::span<double> dydt) {
  dydt[0] = y[1];
  dydt[1] = -y[0];
}

VectorField demo_es_field() {
  return [](double t, std::span<const double> y, std::span<double> dydt) {
    const auto [da, db] = demo_es_rhs(t, y[0], y[1]);
    dydt[0] = da;
    dydt[1] = db;
  };
}

double demo_es_final_error(double rel_tol, double t1) {
  IntegrationConfig cfg;
  cfg.rel_tol = rel_tol;
  cfg.abs_tol = rel_tol * 1e-2;
  const auto [a0, b0] = demo_es_exact(1.0, 1.0, 1.0);
  const Trajectory traj = integrate(demo_es_field(), 1.0, {a0, b0}, t1, cfg);
  const auto [ae, be] = demo_es_exact(1.0, 1.0, t1);
  const auto y = traj.state(traj.size() - 1);
  return std::hypot(y[0] - ae, y[1] - be) / std::hypot(ae, be);
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("harmonic oscillator returns to the start after one period") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  const Trajectory traj = integrate(harmonic, 0.0, {1.0, 0.0}, 2.0 * kPi, cfg);
  CHECK(traj.reason() == StopReason::ReachedEnd);
  CHECK(traj.t_front() == 0.0);
  CHECK(traj.t_back() == 2.0 * kPi);
  const auto y = traj.state(traj.size() - 1);
  CHECK(std::abs(y[0] - 1.0) < 1e-8);
  CHECK(std::abs(y[1]) < 1e-8);
}

TEST_CASE("scalar linear decay hits e^{-1}") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  const Trajectory traj = integrate(
      [](double, std::span<const double> y, std::span<double> d) { d[0] = -y[0]; }, 0.0, {1.0},
      1.0, cfg);
  CHECK(std::abs(traj.state(traj.size() - 1)[0] - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("demo system matches its closed form at t = 16") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  const auto [a0, b0] = demo_es_exact(1.0, 1.0, 1.0);
  const Trajectory traj = integrate(demo_es_field(), 1.0, {a0, b0}, 16.0, cfg);
  const auto y = traj.state(traj.size() - 1);
  CHECK(y[0] == doctest::Approx(std::exp(8.0) / 16.0).epsilon(1e-6));
  CHECK(y[1] == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("halving rel_tol never increases the demo-system final error") {
  for (double t1 : {4.0, 16.0, 64.0}) {
    double prev = demo_es_final_error(1e-4, t1);
    double tol = 1e-4;
    for (int k = 0; k < 8; ++k) {
      tol *= 0.5;
      const double err = demo_es_final_error(tol, t1);
      CHECK(err <= prev * (1.0 + 1e-12));
      prev = err;
    }
  }
}

TEST_CASE("interpolation is exact at stored samples") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-8;
  cfg.abs_tol = 1e-10;
  const Trajectory traj = integrate(harmonic, 0.0, {1.0, 0.0}, 5.0, cfg);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto direct = traj.state(i);
    const auto via_interp = traj.at(traj.time(i));
    CHECK(via_interp[0] == direct[0]);
    CHECK(via_interp[1] == direct[1]);
  }
}

TEST_CASE("dense output: harmonic oscillator mid-span") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  const Trajectory traj = integrate(harmonic, 0.0, {1.0, 0.0}, 2.0 * kPi, cfg);
  const auto y = traj.at(kPi / 2.0);
  CHECK(std::abs(y[0] - 0.0) < 1e-6);
  CHECK(std::abs(y[1] + 1.0) < 1e-6);
}

TEST_CASE("dense output: demo system mid-span against the closed form") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  const auto [a0, b0] = demo_es_exact(1.0, 1.0, 1.0);
  const Trajectory traj = integrate(demo_es_field(), 1.0, {a0, b0}, 16.0, cfg);
  const auto [ae, be] = demo_es_exact(1.0, 1.0, 8.0);
  const auto y = traj.at(8.0);
  CHECK(y[0] == doctest::Approx(ae).epsilon(1e-5));
  CHECK(y[1] == doctest::Approx(be).epsilon(1e-5));
}

TEST_CASE("interpolation outside the span is a domain error") {
  IntegrationConfig cfg;
  const Trajectory traj = integrate(harmonic, 0.0, {1.0, 0.0}, 1.0, cfg);
  CHECK_THROWS_AS(traj.at(-0.5), DomainError);
  CHECK_THROWS_AS(traj.at(1.5), DomainError);
}

TEST_CASE("event detection locates the first root of y1 at pi/2") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  Event ev;
  ev.value = [](double, std::span<const double> y) { return y[0]; };
  cfg.events.push_back(ev);
  const Trajectory traj = integrate(harmonic, 0.0, {1.0, 0.0}, 10.0, cfg);
  CHECK(traj.reason() == StopReason::Event);
  CHECK(traj.event_index() == 0);
  CHECK(std::abs(traj.t_back() - kPi / 2.0) < 1e-6);
}

TEST_CASE("event direction filter skips the wrong-signed crossing") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  Event ev;
  ev.value = [](double, std::span<const double> y) { return y[0]; };
  ev.direction = +1;  // cos t crosses upward first at 3*pi/2
  cfg.events.push_back(ev);
  const Trajectory traj = integrate(harmonic, 0.0, {1.0, 0.0}, 10.0, cfg);
  CHECK(traj.reason() == StopReason::Event);
  CHECK(std::abs(traj.t_back() - 3.0 * kPi / 2.0) < 1e-6);
}

TEST_CASE("deterministic: identical inputs give bit-identical trajectories") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-11;
  const Trajectory a = integrate(demo_es_field(), 1.0, {1.0, 1.0}, 30.0, cfg);
  const Trajectory b = integrate(demo_es_field(), 1.0, {1.0, 1.0}, 30.0, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.time(i) == b.time(i));
    CHECK(a.state(i)[0] == b.state(i)[0]);
    CHECK(a.state(i)[1] == b.state(i)[1]);
  }
}

TEST_CASE("singularity truncates with a flagged partial trajectory") {
  ModelParams p;
  p.lambda = 1.0;
  p.mu = MuSpec::zero();
  // Small amplitude far from resonance: rho collapses to the floor.
  const VectorField field = [&p](double t, std::span<const double> y, std::span<double> d) {
    const ModelDeriv dv = model_rhs(p, t, ModelState{y[0], y[1]});
    d[0] = dv.drho;
    d[1] = dv.dpsi;
  };
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-8;
  cfg.abs_tol = 1e-10;
  bool saw_singular = false;
  for (double psi0 = 0.0; psi0 < 6.2; psi0 += 0.35) {
    const Trajectory traj = integrate(field, 50.0, {2e-8, psi0}, 400.0, cfg);
    if (traj.reason() == StopReason::Singularity) {
      saw_singular = true;
      CHECK(traj.size() >= 1);
      CHECK(traj.t_back() < 400.0);
      break;
    }
  }
  CHECK(saw_singular);
}

TEST_CASE("step budget raises a budget error") {
  IntegrationConfig cfg;
  cfg.max_steps = 10;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  CHECK_THROWS_AS(integrate(harmonic, 0.0, {1.0, 0.0}, 1000.0, cfg), BudgetError);
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(integrate(harmonic, 1.0, {1.0, 0.0}, 1.0), PreconditionError);
  CHECK_THROWS_AS(integrate(harmonic, 1.0, {1.0, 0.0}, 0.5), PreconditionError);
  const double nan = std::nan("");
  CHECK_THROWS_AS(integrate(harmonic, 0.0, {nan, 0.0}, 1.0), PreconditionError);
}

TEST_CASE("max_step is respected") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-6;
  cfg.abs_tol = 1e-8;
  cfg.max_step = 0.05;
  const Trajectory traj = integrate(harmonic, 0.0, {1.0, 0.0}, 2.0, cfg);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    CHECK(traj.time(i) - traj.time(i - 1) <= 0.05 * (1.0 + 1e-12));
  }
}

TEST_CASE("from_samples reproduces nodes and interpolates linearly") {
  const Trajectory traj =
      Trajectory::from_samples(1, {0.0, 1.0, 3.0}, {0.0, 2.0, 6.0});
  CHECK(traj.at(0.0)[0] == 0.0);
  CHECK(traj.at(1.0)[0] == 2.0);
  CHECK(traj.at(2.0)[0] == doctest::Approx(4.0));
  CHECK(traj.at(3.0)[0] == 6.0);
}

TEST_CASE("harmonic energy is conserved at tolerance") {
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  const Trajectory traj = integrate(harmonic, 0.0, {1.0, 0.0}, 200.0 * kPi, cfg);
  const auto y = traj.state(traj.size() - 1);
  const double energy = 0.5 * (y[0] * y[0] + y[1] * y[1]);
  CHECK(energy == doctest::Approx(0.5).epsilon(1e-7));
}

}  // TEST_SUITE
