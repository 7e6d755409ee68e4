#include <cmath>
#include <vector>

#include "autores/asymptotics.hpp"
#include "autores/capture.hpp"
#include "autores/integrator.hpp"
#include "doctest.h"

using namespace autores;

namespace {

const double kPi = std::acos(-1.0);

ModelParams plain_params(double lambda) {
  ModelParams p;
  p.lambda = lambda;
  p.nu = 0.0;
  p.mu = MuSpec::zero();
  return p;
}

struct SlopeFit {
  double slope_rho;
  double slope_psi;
};

// Log-log least squares of both residual components over [tau_lo, tau_hi].
SlopeFit residual_slopes(const SeriesCoeffs& c, double tau_lo, double tau_hi, int n) {
  std::vector<double> x, y_rho, y_psi;
  for (int i = 0; i < n; ++i) {
    const double tau = tau_lo * std::pow(tau_hi / tau_lo, static_cast<double>(i) / (n - 1));
    const Residual r = residual(c, tau);
    x.push_back(std::log(tau));
    y_rho.push_back(std::log(std::abs(r.r_rho)));
    y_psi.push_back(std::log(std::abs(r.r_psi)));
  }
  auto slope = [&](const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
  };
  return SlopeFit{slope(y_rho), slope(y_psi)};
}

}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("coefficients for lambda = 1, psi0 = pi, mu = 0") {
  const SeriesCoeffs c = compute_coeffs(plain_params(1.0), kPi);
  CHECK(c.rho_m1 == doctest::Approx(1.0));
  CHECK(c.rho0 == 0.0);
  CHECK(c.rho1 == 0.0);
  CHECK(c.psi1 == doctest::Approx(-0.5));
  CHECK(c.rho2 == doctest::Approx(0.5));
  CHECK(c.rho3 == doctest::Approx(0.0));
  CHECK(c.psi2 == doctest::Approx(0.0));
  CHECK(c.psi3 == doctest::Approx(-1.0 / 48.0));
}

TEST_CASE("coefficients scale with lambda: rho_{-1} = 2, psi1 = -1 at lambda = 4") {
  const SeriesCoeffs c = compute_coeffs(plain_params(4.0), kPi);
  CHECK(c.rho_m1 == doctest::Approx(2.0));
  CHECK(c.psi1 == doctest::Approx(-1.0));  // -lambda^{1/2}/(2 P')
}

TEST_CASE("rho1 vanishes for every admissible input") {
  for (double lambda : {0.5, 1.0, 4.0}) {
    for (double psi0_seed : {0.0, kPi}) {
      ModelParams p = plain_params(lambda);
      p.mu = MuSpec::series({0.3, 0.1, -0.05});
      const PhaseParams pp = PhaseParams::from_model(p);
      const auto roots = find_roots(pp);
      for (const auto& r : roots) {
        if (r.stability == Stability::Degenerate) continue;
        const SeriesCoeffs c = compute_coeffs(p, r.psi0);
        CHECK(c.rho1 == 0.0);
      }
      (void)psi0_seed;
    }
  }
}

TEST_CASE("construction is refused at a degenerate root and for lambda <= 0") {
  // delta = 1/2, nu = 0: psi0 = 0 is the fold root with P' = 0.
  ModelParams p = plain_params(1.0);
  p.mu = MuSpec::series({0.5});
  CHECK_THROWS_AS(compute_coeffs(p, 0.0), PreconditionError);

  ModelParams neg = plain_params(-1.0);
  CHECK_THROWS_AS(compute_coeffs(neg, kPi), DomainError);

  // psi0 must actually solve the phase equation.
  CHECK_THROWS_AS(compute_coeffs(plain_params(1.0), 1.0), PreconditionError);
}

TEST_CASE("series evaluation: single-term and hand-expanded values") {
  SeriesCoeffs c{};
  c.psi0 = kPi;
  c.rho_m1 = 1.0;
  c.params = plain_params(1.0);
  const ModelState single = eval_series(c, 4.0);
  CHECK(single.rho == doctest::Approx(2.0));
  CHECK(single.psi == doctest::Approx(kPi));

  const SeriesCoeffs full = compute_coeffs(plain_params(1.0), kPi);
  const ModelState s = eval_series(full, 100.0);
  // rho* = 10 + rho2/tau = 10.005, psi* = pi - 0.05 - (1/48) * 1e-3.
  CHECK(s.rho == doctest::Approx(10.0 + 0.5 / 100.0).epsilon(1e-12));
  CHECK(s.psi == doctest::Approx(kPi - 0.05 - (1.0 / 48.0) * 1e-3).epsilon(1e-12));
}

TEST_CASE("series tail: psi approaches psi0 like tau^{-1/2}") {
  const SeriesCoeffs c = compute_coeffs(plain_params(1.0), kPi);
  for (double tau : {1e2, 1e4, 1e6}) {
    const ModelState s = eval_series(c, tau);
    CHECK(std::abs(s.psi - kPi) < 10.0 / std::sqrt(tau));
  }
}

TEST_CASE("series derivative matches finite differences") {
  const SeriesCoeffs c = compute_coeffs(plain_params(1.0), kPi);
  for (double tau : {5.0, 50.0, 500.0}) {
    const double h = tau * 1e-6;
    const ModelState up = eval_series(c, tau + h);
    const ModelState dn = eval_series(c, tau - h);
    const ModelDeriv d = series_derivative(c, tau);
    CHECK(d.drho == doctest::Approx((up.rho - dn.rho) / (2.0 * h)).epsilon(1e-7));
    CHECK(d.dpsi == doctest::Approx((up.psi - dn.psi) / (2.0 * h)).epsilon(1e-7));
  }
}

TEST_CASE("residual magnitude: mu = 0, psi0 = pi, lambda = 1 at tau = 1e4") {
  const SeriesCoeffs c = compute_coeffs(plain_params(1.0), kPi);
  const Residual r = residual(c, 1e4);
  CHECK(std::abs(r.r_rho) < 1e-4);
  CHECK(std::abs(r.r_psi) < 1e-4);
}

TEST_CASE("residual ratio test between tau = 1e3 and 4e3") {
  const SeriesCoeffs c = compute_coeffs(plain_params(1.0), kPi);
  const Residual lo = residual(c, 1e3);
  const Residual hi = residual(c, 4e3);
  // r_psi decays one order (factor 4), r_rho two orders (factor 16).
  const double ratio_psi = std::abs(lo.r_psi / hi.r_psi);
  const double ratio_rho = std::abs(lo.r_rho / hi.r_rho);
  CHECK(ratio_psi > 4.0 * 0.8);
  CHECK(ratio_psi < 4.0 * 1.2);
  CHECK(ratio_rho > 16.0 * 0.8);
  CHECK(ratio_rho < 16.0 * 1.2);
}

TEST_CASE("zero-coefficient sanity: leading-order balance of the psi equation") {
  // With only rho* = lambda^{1/2} tau^{1/2}, psi* = psi0 and mu = 0 the psi
  // defect is -cos(psi0) + O(tau^{-1}); the rho defect is the unbalanced
  // rho*' - sin(psi*) = lambda^{1/2}/(2 sqrt(tau)) demanding the psi1 term.
  SeriesCoeffs c{};
  c.psi0 = kPi;
  c.rho_m1 = 2.0;
  c.params = plain_params(4.0);
  for (double tau : {1e3, 1e5}) {
    const Residual r = residual(c, tau);
    CHECK(r.r_psi == doctest::Approx(-std::cos(kPi)).epsilon(1e-3));
    CHECK(r.r_rho == doctest::Approx(1.0 / std::sqrt(tau)).epsilon(1e-9));
  }
}

TEST_CASE("residual slope test over two decades matches the omitted orders") {
  const SeriesCoeffs c = compute_coeffs(plain_params(4.0), kPi);
  const SlopeFit fit = residual_slopes(c, 1e2, 1e5, 40);
  CHECK(fit.slope_rho == doctest::Approx(-2.0).epsilon(0.05));
  CHECK(fit.slope_psi == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("mu-index toggle only moves the pump term in psi2") {
  ModelParams p = plain_params(1.0);
  p.nu = 0.4;
  p.mu = MuSpec::series({0.3, 0.07, -0.02});
  const PhaseParams pp = PhaseParams::from_model(p);
  const auto roots = find_roots(pp);
  REQUIRE(!roots.empty());
  const double psi0 = roots[1].psi0;
  const SeriesCoeffs printed = compute_coeffs(p, psi0, SeriesOptions{true});
  const SeriesCoeffs alt = compute_coeffs(p, psi0, SeriesOptions{false});
  CHECK(printed.psi1 == alt.psi1);
  CHECK(printed.rho2 == alt.rho2);
  CHECK(printed.rho3 == alt.rho3);
  const double sin_arg = std::sin(2.0 * psi0 + p.nu);
  const double shift = -(printed.mu2 - printed.mu1) * printed.rho_m1 * sin_arg /
                       printed.p_prime;
  CHECK(printed.psi2 - alt.psi2 == doctest::Approx(shift).epsilon(1e-12));
}

TEST_CASE("coefficients are invariant under psi0 -> psi0 + 2*pi") {
  ModelParams p = plain_params(1.0);
  p.mu = MuSpec::series({0.4});
  const SeriesCoeffs a = compute_coeffs(p, kPi);
  const SeriesCoeffs b = compute_coeffs(p, kPi + 2.0 * kPi);
  CHECK(a.psi1 == doctest::Approx(b.psi1).epsilon(1e-12));
  CHECK(a.psi2 == doctest::Approx(b.psi2).epsilon(1e-12));
  CHECK(a.psi3 == doctest::Approx(b.psi3).epsilon(1e-12));
  CHECK(a.rho2 == doctest::Approx(b.rho2).epsilon(1e-12));
  CHECK(a.rho3 == doctest::Approx(b.rho3).epsilon(1e-12));
}

TEST_CASE("a trajectory started on the series stays near it over a doubling of tau") {
  const ModelParams p = plain_params(1.0);
  const SeriesCoeffs c = compute_coeffs(p, kPi);
  const double tau0 = 1e3;
  const ModelState start = eval_series(c, tau0);
  IntegrationConfig cfg = ms_capture_config(p, 2.0 * tau0);
  const Trajectory traj = integrate(ms_field(p), tau0, {start.rho, start.psi}, 2.0 * tau0, cfg);
  const double bound = 10.0 / std::sqrt(tau0);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const ModelState ref = eval_series(c, traj.time(i));
    const auto y = traj.state(i);
    CHECK(std::hypot(y[0] - ref.rho, y[1] - ref.psi) < bound);
  }
}

}  // TEST_SUITE
