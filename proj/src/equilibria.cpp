#include "autores/equilibria.hpp"

#include <algorithm>
#include <cmath>

#include "autores/parallel.hpp"

namespace autores {

namespace {

constexpr int kScanPanels = 1440;
constexpr double kDedupTol = 1e-8;

double two_pi() { return 2.0 * std::acos(-1.0); }

double wrap_to_period(double psi) {
  const double period = two_pi();
  double w = std::fmod(psi, period);
  if (w < 0.0) w += period;
  if (w >= period) w -= period;
  return w;
}

double root_value_tol(const PhaseParams& pp) { return 1e-12 * std::max(1.0, std::abs(pp.delta)); }

// Bisection to a tight bracket followed by safeguarded Newton polish.
double refine_root(const PhaseParams& pp, double lo, double hi, double flo) {
  for (int it = 0; it < 80 && (hi - lo) > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = p_eval(mid, pp, 0);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 6; ++it) {
    const double fx = p_eval(x, pp, 0);
    const double dx = p_eval(x, pp, 1);
    if (std::abs(dx) < 1e-14) break;
    const double step = fx / dx;
    const double x_new = x - step;
    if (!(x_new >= lo - 1e-12 && x_new <= hi + 1e-12)) break;
    x = x_new;
    if (std::abs(step) < 1e-16) break;
  }
  return x;
}

// Critical point of P inside a bracket where P' changes sign.
double refine_critical(const PhaseParams& pp, double lo, double hi, double dlo) {
  for (int it = 0; it < 80 && (hi - lo) > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double dm = p_eval(mid, pp, 1);
    if (dm == 0.0) return mid;
    if ((dm < 0.0) == (dlo < 0.0)) {
      lo = mid;
      dlo = dm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

EquilibriumPoint make_point(const PhaseParams& pp, double psi) {
  EquilibriumPoint pt;
  pt.psi0 = wrap_to_period(psi);
  pt.p_prime = p_eval(pt.psi0, pp, 1);
  pt.p_double_prime = p_eval(pt.psi0, pp, 2);
  pt.p_triple_prime = p_eval(pt.psi0, pp, 3);
  if (pt.p_prime > kDegeneracyTol) {
    pt.stability = Stability::Stable;
  } else if (pt.p_prime < -kDegeneracyTol) {
    pt.stability = Stability::Unstable;
  } else {
    pt.stability = Stability::Degenerate;
  }
  return pt;
}

}  // namespace

PhaseParams PhaseParams::from_model(const ModelParams& p) {
  p.validate();
  return PhaseParams{mu_leading_coeff(p.mu) * std::sqrt(std::abs(p.lambda)), p.nu};
}

void PhaseParams::validate() const {
  if (!std::isfinite(delta)) throw DomainError("delta must be finite");
  if (!std::isfinite(nu) || nu < 0.0 || nu >= std::acos(-1.0)) {
    throw DomainError("nu must lie in [0, pi)");
  }
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Degenerate: return "degenerate";
  }
  return "?";
}

const char* to_string(Region r) {
  switch (r) {
    case Region::OmegaMinus: return "OmegaMinus";
    case Region::OmegaPlus: return "OmegaPlus";
    case Region::GammaMinus: return "GammaMinus";
    case Region::GammaPlus: return "GammaPlus";
  }
  return "?";
}

double p_eval(double psi, const PhaseParams& pp, int order) {
  const double arg = 2.0 * psi + pp.nu;
  switch (order) {
    case 0: return pp.delta * std::sin(arg) - std::sin(psi);
    case 1: return 2.0 * pp.delta * std::cos(arg) - std::cos(psi);
    case 2: return -4.0 * pp.delta * std::sin(arg) + std::sin(psi);
    case 3: return -8.0 * pp.delta * std::cos(arg) + std::cos(psi);
    default: throw DomainError("derivative order must be 0..3");
  }
}

std::vector<EquilibriumPoint> find_roots(const PhaseParams& pp) {
  pp.validate();
  const double period = two_pi();
  const double h = period / kScanPanels;
  const double vtol = root_value_tol(pp);

  std::vector<double> node_f(kScanPanels + 1), node_df(kScanPanels + 1);
  for (int i = 0; i <= kScanPanels; ++i) {
    const double x = i * h;
    node_f[i] = p_eval(x, pp, 0);
    node_df[i] = p_eval(x, pp, 1);
  }

  std::vector<double> candidates;
  for (int i = 0; i < kScanPanels; ++i) {
    const double x = i * h;
    if (std::abs(node_f[i]) < vtol) {
      candidates.push_back(x);
      continue;
    }
    if (node_f[i] * node_f[i + 1] < 0.0) {
      candidates.push_back(refine_root(pp, x, x + h, node_f[i]));
    }
  }

  // A pair of simple roots can hide inside one panel around an extremum of P;
  // a tangency on the bifurcation curve leaves a Degenerate touch point.
  for (int i = 0; i < kScanPanels; ++i) {
    if (node_df[i] * node_df[i + 1] >= 0.0) continue;
    const double x = i * h;
    const double xc = refine_critical(pp, x, x + h, node_df[i]);
    const double fc = p_eval(xc, pp, 0);
    if (std::abs(fc) < 1e-9 * std::max(1.0, std::abs(pp.delta))) {
      candidates.push_back(xc);
    } else if (node_f[i] * fc < 0.0) {
      candidates.push_back(refine_root(pp, x, xc, node_f[i]));
      candidates.push_back(refine_root(pp, xc, x + h, fc));
    }
  }

  for (double& c : candidates) c = wrap_to_period(c);
  std::sort(candidates.begin(), candidates.end());
  std::vector<double> unique_roots;
  for (double c : candidates) {
    if (unique_roots.empty() || c - unique_roots.back() > kDedupTol) {
      unique_roots.push_back(c);
    }
  }
  while (unique_roots.size() > 1 &&
         unique_roots.front() + period - unique_roots.back() <= kDedupTol) {
    unique_roots.pop_back();
  }

  std::vector<EquilibriumPoint> roots;
  roots.reserve(unique_roots.size());
  for (double r : unique_roots) roots.push_back(make_point(pp, r));
  return roots;
}

double ell(const PhaseParams& pp) {
  const double q = 4.0 * pp.delta * pp.delta - 1.0;
  const double s = std::sin(pp.nu);
  return q * q * q - 27.0 * pp.delta * pp.delta * s * s;
}

Region region(const PhaseParams& pp) {
  const double l = ell(pp);
  if (std::abs(l) < 1e-10) return pp.delta > 0.0 ? Region::GammaPlus : Region::GammaMinus;
  return l > 0.0 ? Region::OmegaPlus : Region::OmegaMinus;
}

double threshold_delta(double nu) {
  if (!std::isfinite(nu) || nu < 0.0 || nu >= std::acos(-1.0)) {
    throw DomainError("nu must lie in [0, pi)");
  }
  const double s = std::sin(nu);
  if (s == 0.0) return 0.5;
  // ell(., nu) has exactly one positive root; it lies in (1/2, 10].
  PhaseParams pp{0.0, nu};
  double lo = 0.5, hi = 10.0;
  pp.delta = lo;
  double flo = ell(pp);
  for (int it = 0; it < 200 && (hi - lo) > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    pp.delta = mid;
    const double fm = ell(pp);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<BifurcationRow> bifurcation_scan(std::span<const double> deltas,
                                             std::span<const double> nus, unsigned workers) {
  std::vector<BifurcationRow> rows(deltas.size() * nus.size());
  parallel_for(rows.size(), workers, [&](std::size_t idx) {
    const std::size_t di = idx / nus.size();
    const std::size_t ni = idx % nus.size();
    PhaseParams pp{deltas[di], nus[ni]};
    BifurcationRow& row = rows[idx];
    row.delta = pp.delta;
    row.nu = pp.nu;
    row.ell = ell(pp);
    row.region = region(pp);
    row.roots = find_roots(pp);
  });
  return rows;
}

}  // namespace autores
