#include <cmath>
#include <vector>

#include "autores/duffing.hpp"
#include "doctest.h"

using namespace autores;

namespace {

const double kPi = std::acos(-1.0);

DuffingParams reference_params() {
  DuffingParams p;
  p.eps = 1e-2;
  p.alpha = 0.25e-4;
  p.beta = 1.0;
  p.gamma = 1.0 / 6.0;
  p.nu = 0.0;
  return p;
}

}  // namespace

TEST_SUITE("duffing") {

TEST_CASE("reduction at the reference parameters") {
  const ReductionResult r = reduce(reference_params());
  CHECK(r.kappa == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.lambda == doctest::Approx(8.0).epsilon(1e-12));
  const auto& cf = std::get<MuClosedForm>(r.mu.form);
  CHECK(cf.c == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(cf.b == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(r.mu0 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r.delta_model == doctest::Approx(0.25 * std::sqrt(8.0)).epsilon(1e-14));
  CHECK(r.delta_model == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  // The reduction admits two conventions for the bifurcation parameter that
  // disagree by a factor of 2; both are reported side by side and the
  // model-side value drives predictions.
  CHECK(r.delta_conclusion == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.delta_conclusion == doctest::Approx(2.0 * r.delta_model).epsilon(1e-12));
  CHECK(r.slow_time_scale == doctest::Approx(1e-2 / 4.0).epsilon(1e-14));
}

TEST_CASE("reduction: gamma = 4/3 gives kappa = 1") {
  DuffingParams p = reference_params();
  p.gamma = 4.0 / 3.0;
  CHECK(reduce(p).kappa == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("reduction is reproducible to the last digit") {
  const ReductionResult a = reduce(reference_params());
  const ReductionResult b = reduce(reference_params());
  CHECK(a.kappa == b.kappa);
  CHECK(a.lambda == b.lambda);
  CHECK(a.delta_model == b.delta_model);
  CHECK(a.delta_conclusion == b.delta_conclusion);
  // Recomputation at doubled precision agrees to the last double digit.
  const DuffingParams p = reference_params();
  const long double kappa_l = cbrtl(4.0L / (3.0L * (long double)p.gamma));
  const long double lambda_l =
      8.0L * (long double)p.alpha * kappa_l * kappa_l / ((long double)p.eps * (long double)p.eps);
  const long double mu0_l = (long double)p.beta * sqrtl(2.0L * kappa_l) / 4.0L /
                            sqrtl(2.0L * kappa_l);
  const long double delta_l = mu0_l * sqrtl(lambda_l);
  CHECK(a.kappa == doctest::Approx((double)kappa_l).epsilon(4e-16));
  CHECK(a.lambda == doctest::Approx((double)lambda_l).epsilon(4e-16));
  CHECK(a.delta_model == doctest::Approx((double)delta_l).epsilon(4e-16));
}

TEST_CASE("observables at hand-checked samples") {
  DuffingParams p = reference_params();
  // Two-sample synthetic trajectory; the formulas are evaluated pointwise.
  const Trajectory traj =
      Trajectory::from_samples(2, {0.0, 1.0}, {1.0, 0.0, 1.0, 0.0});
  DuffingParams p_eps0 = p;
  p_eps0.eps = 1e-9;  // effectively eps = 0 for the energy formula
  const DuffingObservables obs = observables(traj, p_eps0, 0.5);
  REQUIRE(!obs.energy.empty());
  CHECK(obs.energy.front() == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(obs.delta.front() == doctest::Approx(0.0).epsilon(1e-12));  // phi(0) + atan2(0, 1)

  const Trajectory vert = Trajectory::from_samples(2, {0.0, 1.0}, {0.0, 1.0, 0.0, 1.0});
  const DuffingObservables obs_v = observables(vert, p_eps0, 0.5);
  CHECK(obs_v.delta.front() == doctest::Approx(kPi / 2.0).epsilon(1e-12));
}

TEST_CASE("samples at the phase-space origin are skipped and counted") {
  DuffingParams p = reference_params();
  const Trajectory zero =
      Trajectory::from_samples(2, {0.0, 1.0, 2.0}, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  const DuffingObservables obs = observables(zero, p, 0.5);
  CHECK(obs.skipped_samples > 0);
  CHECK(obs.t.empty());
}

TEST_CASE("energy is conserved over many periods in the eps -> 0 limit") {
  DuffingParams p = reference_params();
  p.eps = 1e-8;
  p.alpha = 1e-8;
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  const double t_end = 2.0 * kPi * 1000.0;
  const Trajectory traj = integrate(duffing_field(p), 0.0, {1.0, 0.0}, t_end, cfg);
  const DuffingObservables obs = observables(traj, p, 2.0 * kPi / 8.0);
  const double e0 = obs.energy.front();
  for (double e : obs.energy) {
    CHECK(e == doctest::Approx(e0).epsilon(1e-5));
  }
}

TEST_CASE("captured run: growing energy, bounded mismatch, envelope within 15%") {
  // Initial datum from the locked region of the reduced model,
  // (u, v) = kappa*rho0*(cos psi0, sin psi0) with rho0 = 1.8, psi0 = 1.
  const DuffingParams p = reference_params();
  const double u0 = 2.0 * 1.8 * std::cos(1.0);
  const double v0 = 2.0 * 1.8 * std::sin(1.0);
  CompareOptions opts;
  opts.horizon_c = 20.0;
  const EnvelopeReport report = compare_envelope(p, u0, v0, 2000.0, opts);
  CHECK(report.captured);
  CHECK(report.model_ok);
  const double e0 = 0.5 * (u0 * u0 + v0 * v0);
  CHECK(report.energy_final > 5.0 * e0);
  CHECK(report.delta_band < 2.0 * kPi);
  REQUIRE(!report.windows.empty());
  CHECK(report.max_rel_env_err < 0.15);
}

TEST_CASE("tiny initial datum: bounded energy and drifting mismatch") {
  const DuffingParams p = reference_params();
  CompareOptions opts;
  opts.horizon_c = 20.0;  // the mismatch needs ~alpha*t^2 > 4*pi to manifest
  const EnvelopeReport report = compare_envelope(p, 1e-3, 0.0, 2000.0, opts);
  CHECK(!report.captured);
  CHECK(report.delta_drift > 4.0 * kPi);
  CHECK(report.energy_max < 1.0);
  CHECK(report.windows.empty());
}

TEST_CASE("halving eps at fixed lambda and delta halves the envelope remainder") {
  // The slow-orbit phase of a captured run dephases from the reduced model by
  // an eps-independent few percent, so the remainder that scales with eps is
  // the distance between full runs at matched slow-time windows: the envelope
  // converges to its slow-flow limit at first order.
  const double u0 = 2.0 * 1.8 * std::cos(1.0);
  const double v0 = 2.0 * 1.8 * std::sin(1.0);
  const double kappa = 2.0;
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  cfg.max_step = 0.5 * kPi;

  auto env_at_tau = [&](const Trajectory& tr, const DuffingParams& p, double tau_c) {
    const double t_c = 2.0 * kappa * tau_c / p.eps;
    const double w = 6.0 * kPi;
    double peak = 0.0;
    for (int i = 0; i <= 384; ++i) {
      const double t = t_c - w / 2.0 + w * i / 384.0;
      peak = std::max(peak, std::abs(tr.at(t)[0]));
    }
    return peak;
  };

  std::vector<DuffingParams> ps;
  std::vector<Trajectory> runs;
  for (double eps : {1e-2, 5e-3, 2.5e-3}) {
    DuffingParams p = reference_params();
    const double scale = eps / 1e-2;
    p.eps = eps;
    p.alpha = 0.25e-4 * scale * scale;  // keeps lambda = 8 alpha kappa^2/eps^2 fixed
    CHECK(reduce(p).lambda == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(reduce(p).delta_model == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    ps.push_back(p);
    runs.push_back(integrate(duffing_field(p), 0.0, {u0, v0}, 2.0 * kappa * 2.5 / eps, cfg));
  }
  double dist[2];
  for (int lvl = 0; lvl < 2; ++lvl) {
    dist[lvl] = 0.0;
    for (double tau = 0.06; tau <= 2.4; tau += 0.08) {
      const double ea = env_at_tau(runs[lvl], ps[lvl], tau);
      const double eb = env_at_tau(runs[lvl + 1], ps[lvl + 1], tau);
      dist[lvl] = std::max(dist[lvl], std::abs(ea - eb) / eb);
    }
  }
  CHECK(dist[1] < 0.75 * dist[0]);
}

TEST_CASE("horizon precondition") {
  const DuffingParams p = reference_params();
  CHECK_THROWS_AS(compare_envelope(p, 0.1, 0.0, 300.0), PreconditionError);
}

}  // TEST_SUITE
