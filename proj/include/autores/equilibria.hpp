#pragma once
// Algebra of the equilibrium phase equation
//   P(psi; delta, nu) = delta*sin(2*psi + nu) - sin(psi) = 0:
// evaluation and derivatives, root finding on [0, 2*pi), stability
// classification by the sign of P', the bifurcation function
//   ell(delta, nu) = (4*delta^2 - 1)^3 - 27*delta^2*sin(nu)^2
// partitioning the parameter plane, and the threshold delta_nu where a
// stable/unstable pair of equilibrium phases coalesces.

#include <span>
#include <string>
#include <vector>

#include "autores/model.hpp"

namespace autores {

struct PhaseParams {
  double delta = 0.0;
  double nu = 0.0;

  static PhaseParams from_model(const ModelParams& p);
  void validate() const;
};

enum class Stability { Stable, Unstable, Degenerate };

const char* to_string(Stability s);

struct EquilibriumPoint {
  double psi0 = 0.0;  // in [0, 2*pi)
  double p_prime = 0.0;
  double p_double_prime = 0.0;
  double p_triple_prime = 0.0;
  Stability stability = Stability::Degenerate;
};

// |P'| at or below this is classified Degenerate.
inline constexpr double kDegeneracyTol = 1e-6;

// P and its first three derivatives in psi (order 0..3).
double p_eval(double psi, const PhaseParams& pp, int order);

// All roots of P(.; delta, nu) on [0, 2*pi), refined to |P| < 1e-12 (scaled),
// deduplicated within 1e-8, sorted ascending. Near a fold the coalescing pair
// may be reported as a single Degenerate root.
std::vector<EquilibriumPoint> find_roots(const PhaseParams& pp);

enum class Region { OmegaMinus, OmegaPlus, GammaMinus, GammaPlus };

const char* to_string(Region r);

double ell(const PhaseParams& pp);
Region region(const PhaseParams& pp);

// Smallest delta > 0 with ell(delta, nu) = 0; exactly 1/2 at nu = 0.
double threshold_delta(double nu);

struct BifurcationRow {
  double delta = 0.0;
  double nu = 0.0;
  double ell = 0.0;
  Region region = Region::OmegaMinus;
  std::vector<EquilibriumPoint> roots;
};

// Root census over a (delta, nu) grid, delta outer / nu inner, parallelized
// per grid point with index-ordered assembly.
std::vector<BifurcationRow> bifurcation_scan(std::span<const double> deltas,
                                             std::span<const double> nus, unsigned workers);

}  // namespace autores
