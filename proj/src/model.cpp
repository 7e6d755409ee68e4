#include "autores/model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace autores {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

MuSpec MuSpec::closed_form(double c, double b) {
  MuSpec mu;
  mu.form = MuClosedForm{c, b};
  mu.validate();
  return mu;
}

MuSpec MuSpec::series(std::vector<double> coeffs) {
  MuSpec mu;
  mu.form = MuSeries{std::move(coeffs)};
  mu.validate();
  return mu;
}

bool MuSpec::is_zero() const {
  if (const auto* s = std::get_if<MuSeries>(&form)) {
    for (double c : s->coeffs) {
      if (c != 0.0) return false;
    }
    return true;
  }
  return std::get<MuClosedForm>(form).c == 0.0;
}

void MuSpec::validate() const {
  if (const auto* s = std::get_if<MuSeries>(&form)) {
    if (s->coeffs.empty()) throw DomainError("mu series needs at least the leading coefficient");
    for (double c : s->coeffs) {
      if (!finite(c)) throw DomainError("mu series coefficients must be finite");
    }
  } else {
    const auto& cf = std::get<MuClosedForm>(form);
    if (!finite(cf.c) || !finite(cf.b)) throw DomainError("mu closed form requires finite c, b");
    if (!(cf.b > 0.0)) throw DomainError("mu closed form requires b > 0");
  }
}

double eval_mu(const MuSpec& mu, double tau) {
  if (const auto* s = std::get_if<MuSeries>(&mu.form)) {
    if (!(tau > 0.0)) throw DomainError("mu series is defined for tau > 0");
    const double r = 1.0 / std::sqrt(tau);
    double acc = 0.0;
    double pow_term = r;  // tau^{-(2k+1)/2}
    for (double c : s->coeffs) {
      acc += c * pow_term;
      pow_term /= tau;
    }
    return acc;
  }
  const auto& cf = std::get<MuClosedForm>(mu.form);
  const double arg = 1.0 + cf.b * tau;
  if (!(arg > 0.0)) throw DomainError("mu closed form is defined for 1 + b*tau > 0");
  return cf.c / std::sqrt(arg);
}

double mu_leading_coeff(const MuSpec& mu) {
  if (const auto* s = std::get_if<MuSeries>(&mu.form)) return s->coeffs.front();
  const auto& cf = std::get<MuClosedForm>(mu.form);
  return cf.c / std::sqrt(cf.b);
}

double mu_series_coeff(const MuSpec& mu, int k) {
  if (k < 0) throw DomainError("mu series index must be non-negative");
  if (const auto* s = std::get_if<MuSeries>(&mu.form)) {
    return static_cast<std::size_t>(k) < s->coeffs.size() ? s->coeffs[static_cast<std::size_t>(k)]
                                                          : 0.0;
  }
  // c*(1+b*tau)^{-1/2} = sum_k c * binom(-1/2, k) * b^{-(2k+1)/2} * tau^{-(2k+1)/2}.
  const auto& cf = std::get<MuClosedForm>(mu.form);
  double binom = 1.0;
  for (int j = 1; j <= k; ++j) binom *= (-0.5 - (j - 1)) / j;
  return cf.c * binom * std::pow(cf.b, -(2.0 * k + 1.0) / 2.0);
}

void ModelParams::validate() const {
  if (!finite(lambda) || lambda == 0.0) throw DomainError("lambda must be finite and nonzero");
  if (!finite(nu) || nu < 0.0 || nu >= std::acos(-1.0)) {
    throw DomainError("nu must lie in [0, pi)");
  }
  if (!(rho_floor > 0.0)) throw DomainError("rho floor must be positive");
  mu.validate();
}

double ModelParams::delta() const { return mu_leading_coeff(mu) * std::sqrt(std::abs(lambda)); }

ModelDeriv model_rhs(const ModelParams& p, double tau, const ModelState& s) {
  if (!(s.rho > p.rho_floor)) {
    throw SingularityError("amplitude at or below the rho floor; phase equation singular");
  }
  const double m = eval_mu(p.mu, tau);
  const double arg = 2.0 * s.psi + p.nu;
  return ModelDeriv{
      std::sin(s.psi) - m * s.rho * std::sin(arg),
      s.rho * s.rho - p.lambda * tau - m * std::cos(arg) + std::cos(s.psi) / s.rho,
  };
}

void DuffingParams::validate() const {
  if (!(eps > 0.0 && eps < 0.1)) throw DomainError("eps must lie in (0, 0.1)");
  if (!(alpha > 0.0 && alpha < 0.01)) throw DomainError("alpha must lie in (0, 0.01)");
  if (!(gamma > 0.0) || !finite(gamma)) throw DomainError("gamma must be positive");
  if (!finite(beta)) throw DomainError("beta must be finite");
  if (!finite(nu) || nu < 0.0 || nu >= std::acos(-1.0)) throw DomainError("nu must lie in [0, pi)");
}

double duffing_phase(const DuffingParams& p, double t) { return t - p.alpha * t * t; }

std::pair<double, double> duffing_rhs(const DuffingParams& p, double t, double u, double v) {
  const double decay = 1.0 + p.eps * t;
  if (!(decay > 0.0)) throw DomainError("duffing pump is defined for 1 + eps*t > 0");
  const double phi = duffing_phase(p, t);
  const double a = std::cos(phi);
  const double b = p.beta * std::cos(2.0 * phi + p.nu) / std::sqrt(decay);
  const double restoring = (1.0 + p.eps * b) * (u - p.gamma * p.eps * u * u * u);
  return {v, p.eps * a - restoring};
}

std::pair<double, double> demo_es_rhs(double t, double a, double b) {
  if (!(t > 0.0)) throw DomainError("demo system is defined for t > 0");
  return {a * b * std::pow(t, -0.25) - a / t, -0.5 * b / t};
}

std::pair<double, double> demo_es_exact(double a0, double b0, double t) {
  if (!(t > 0.0)) throw DomainError("demo system is defined for t > 0");
  return {a0 / t * std::exp(4.0 * b0 * std::pow(t, 0.25)), b0 / std::sqrt(t)};
}

std::pair<double, double> demo_es_linearization_eigenvalues(double t) {
  if (!(t > 0.0)) throw DomainError("demo system is defined for t > 0");
  return {-1.0 / t, -0.5 / t};
}

}  // namespace autores
