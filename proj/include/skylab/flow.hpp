#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skylab/energy.hpp"
#include "skylab/grid.hpp"
#include "skylab/maps.hpp"

namespace skylab {

struct FlowParams {
  double step_size = 0.05;     // halved on rejected steps
  int max_iters = 500;
  double grad_tol = 1e-4;      // stop when sup-node projected gradient is below
  int renormalize_every = 1;
  int snapshot_every = 0;      // 0 = keep no intermediate fields
};

enum class FlowStop { converged, max_iters, energy_diverging, stalled };
std::string to_string(FlowStop s);

struct FlowTrajectory {
  std::vector<double> energy;  // E_{r,h} after each accepted step (index 0 = start)
  std::vector<double> q_raw;
  std::vector<double> step;    // accepted step sizes
  std::vector<SphereField> snapshots;
  FlowStop reason = FlowStop::max_iters;
  int iterations = 0;
  SphereField final_field;
};

/// Raw gradient of the discrete quadrature energy E_{r,h} with respect to the
/// node values (quadrature weights included); grad has 3 doubles per node.
void energy_gradient(const SphereField& n, double r, double h, std::vector<double>& grad);

/// Discrete energy the flow descends (same estimator set as evaluate():
/// integrated-by-parts helicity, trapezoid weights).
double flow_energy(const SphereField& n, double r, double h);

/// Projected gradient descent on the sphere constraint: tangent-project the
/// gradient at every node, step with backtracking, renormalize node vectors.
FlowTrajectory gradient_flow(const SphereField& n0, double r, double h, const FlowParams& p);

/// One stability probe of the homogeneous state: the perturbed map
/// n_t = (e3 + t phi_lambda)/|e3 + t phi_lambda| against E_{r,h}.
struct StabilityProbe {
  double lambda = 0, t = 0;
  double l2 = 0, l4 = 0;        // || n_t - e3 ||
  double gap = 0;               // E_{r,h}[n_t] - E_{r,h}[e3]
  double quad_form = 0;         // (1/2) int |grad phi_lambda|^2 + h |phi_lambda|^2
};

struct StabilityReport {
  std::vector<StabilityProbe> probes;
  bool all_positive = true;
  std::optional<StabilityProbe> witness;  // first negative-gap probe, if any
  std::string verdict;
};

/// Scan dilates phi_lambda and amplitudes t. When max_l2 (or max_l4) is
/// positive, amplitudes are rescaled so the probe stays inside that ball.
StabilityReport probe_homogeneous_stability(double r, double h, std::span<const double> lambdas,
                                            std::span<const double> amplitudes,
                                            double max_l2 = 0.0, double max_l4 = 0.0);

struct SweepRow {
  double r = 0;
  int k = 0;
  double scale = 0;  // R (gluing), L (stretching); infinity marks extrapolated rows
  double E = 0;
  double theorem_value = 0;
  double gap = 0;
  bool resolved = true;
};

/// Minimal-energy table over (r, k). Negative k rows glue |k| cutoff
/// skyrmions over the R schedule, positive k rows glue anti-skyrmions of core
/// lambda_pos; per-(r,k) the Richardson limit of the 1/R^2 tail is appended
/// as a scale=inf row (that value is the "best achieved" estimate).
std::vector<SweepRow> minimal_energy_sweep(std::span<const double> r_values,
                                           std::span<const int> k_values,
                                           std::span<const double> R_schedule,
                                           double lambda_pos = 0.05);

struct DivergenceResult {
  std::vector<SweepRow> rows;      // E_r[n_L] per L (theorem_value = slope oracle * L)
  double fitted_slope = 0;         // least squares over the whole schedule
  double tail_slope = 0;           // secant through the two largest L
  double slope_oracle = 0;         // quadrature of the 1D stretch integrand
  bool decreasing = false;
};

/// Energy of the stretched family along an L schedule for r > 1.
DivergenceResult divergence_sweep(double r, int k, std::span<const double> L_schedule);

/// Quadrature of the 1D integrand 2(1-r^2)/(r^2 x^2 + 1)^2 over the line;
/// equals pi (1 - r^2) / r.
double stretched_slope_oracle(double r);

/// Smooth random tangent perturbation (a handful of Gaussian bumps in random
/// tangent directions), rescaled so the sup-norm of the node displacement is
/// `sup_amplitude`. Deterministic in the seed.
SphereField add_tangent_noise(const SphereField& n, double sup_amplitude, std::uint64_t seed);

/// E_{r,h} of a family on its default grid; glued families (multi_vortex,
/// stretched) are evaluated per piece on piece-sized grids and summed, which
/// is exact because the pieces have disjoint supports.
EnergyBreakdown evaluate_family(const AnalyticMap& map, double r, double h = 0.0);

}  // namespace skylab
