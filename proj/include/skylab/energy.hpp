#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skylab/grid.hpp"
#include "skylab/maps.hpp"

namespace skylab {

/// Every functional of one field evaluation: the energy terms
/// D, H, V, Z, A, the assembled E_r = D + rH + V and E_{r,h} = E_r + hZ,
/// the topological degree, the Bogomol'nyi residual
/// (r^2/2) ||D_1^r n + n x D_2^r n||^2, and the factorization defects.
struct EnergyBreakdown {
  double D = 0, H_ibp = 0, H_direct = 0, V = 0, Z = 0, A = 0;
  double E_r = 0, E_rh = 0;
  double Q_raw = 0;
  int Q_int = 0;
  bool degree_resolved = true;  // |Q_raw - Q_int| <= 0.05
  double residual = 0;
  double fact_gap = 0;      // worst of the three factorization defects below
  double fact_gap_e11 = 0;  // E_r - 4 pi r^2 Q_raw - residual - (1-r^2) D
  double fact_gap_plus = 0, fact_gap_minus = 0;  // Dirichlet factorization, both signs
  double r = 0, h = 0;
  int N = 0;
  double S = 0;
};

EnergyBreakdown evaluate(const SphereField& n, double r, double h = 0.0);

double helicity_direct(const SphereField& n);
double helicity_ibp(const SphereField& n);

/// (Q_raw, nearest integer). Attach-your-own warning when they differ by
/// more than 0.05; evaluate() records that in degree_resolved.
std::pair<double, int> degree(const SphereField& n);

/// Degree of an equivariant map from its boundary data,
/// (1/4pi) (cos Theta(0) - cos Theta(inf)) (Phi(2pi) - Phi(0)).
/// Requires Theta(0) in pi Z and Theta(inf) in 2 pi Z up to 1e-9.
double equivariant_degree(double theta0, double theta_inf, double phi_winding);

double bogomolnyi_residual(const SphereField& n, double r);

/// Worst of the e1.1-style defect and the two Dirichlet factorizations.
double factorization_gap(const SphereField& n, double r);

/// D - 4 pi Q_raw - V / r^2; vanishes on Bogomol'nyi solutions.
double helical_identity_gap(const SphereField& n, double r);

/// Truncation-tail policy for non-compact families: evaluate on the family
/// default grid and on the doubled window at the same spacing; report the
/// tail estimate |value(S) - value(2S)| and the 1/S^2 limit of the pair.
struct TailCorrected {
  EnergyBreakdown base;      // default grid
  EnergyBreakdown wide;      // doubled window, same spacing
  double E_r = 0, D = 0;     // extrapolated values
  double tail_estimate = 0;  // |E_r(S) - E_r(2S)|
};
TailCorrected evaluate_with_tail(const AnalyticMap& map, double r, double h = 0.0);

struct BrsResult {
  double total = 0;       // E_1 + correction
  double e1 = 0;          // E_r at r = 1 on the sampled grid
  double correction = 0;  // contour estimate of int e3 . (curl n)
  bool converged = true;
  std::vector<double> contour_values;  // one per radius
};

/// BRS comparison energy: E_1 plus the curl correction, the latter taken as
/// the limit of circle integrals of (n1 dx1 + n2 dx2) at the given radii.
BrsResult brs_energy(const AnalyticMap& map, std::span<const double> radii);

std::string to_json(const EnergyBreakdown& b);
EnergyBreakdown breakdown_from_json(const std::string& text);

/// Plain serial re-implementations used to cross-check the parallel kernels.
namespace reference {
double dirichlet(const SphereField& n);
double helicity_ibp(const SphereField& n);
double potential(const SphereField& n);
double degree_raw(const SphereField& n);
}  // namespace reference

}  // namespace skylab
