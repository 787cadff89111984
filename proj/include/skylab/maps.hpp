#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "skylab/grid.hpp"
#include "skylab/vec3.hpp"

namespace skylab {

/// A closed-form sphere-valued map on the plane. Values are unit vectors;
/// families whose deviation from e3 has compact support report its radius.
class AnalyticMap {
 public:
  virtual ~AnalyticMap() = default;

  virtual Vec3 value(double x1, double x2) const = 0;

  /// True when first derivatives are available in closed form.
  virtual bool has_exact_derivatives() const { return false; }
  virtual void derivatives(double x1, double x2, Vec3& d1, Vec3& d2) const;

  /// Radius of the support of (map - e3); infinity when not compact.
  virtual double support_radius() const;

  /// Desk-scale grid this family is normally evaluated on.
  virtual GridSpec default_grid() const = 0;

  /// Canonical family string in the CLI mini-language.
  virtual std::string describe() const = 0;

  /// Glued families decompose into translates with disjoint supports; the
  /// energy of the whole map is the weighted sum over pieces. Empty for
  /// everything else.
  virtual std::vector<std::pair<std::shared_ptr<const AnalyticMap>, int>> additive_pieces()
      const {
    return {};
  }
};

using MapPtr = std::shared_ptr<const AnalyticMap>;

MapPtr homogeneous();
MapPtr skyrmion(double r);
MapPtr anti_skyrmion(double r);
MapPtr cutoff_skyrmion(double r, double R);
MapPtr cutoff_anti_skyrmion(double r, double R);
MapPtr multi_vortex(double r, double R, int k);
MapPtr stretched(double r, double L, int k);
MapPtr equivariant(std::function<double(double)> theta_profile, int m, double psi0,
                   double scale_hint);
MapPtr distorted(Complex a);
MapPtr meromorphic(int k, Complex a);
MapPtr perturbed_homogeneous(double lambda, double t);

/// Sample a map on a grid; values are renormalized to unit length.
/// Throws on non-finite values, naming the offending node.
SphereField sample(const AnalyticMap& map, const GridSpec& spec);

// Profile helpers (exposed for tests and the 1D oracles).
double skyrmion_theta(double rho, double r);        // theta^r, pi -> 0
double skyrmion_theta_prime(double rho, double r);  // = -sin(theta^r)/rho
double cutoff_zeta(double rho, double R);           // 1 on [0,R/4], 0 on [R/2,inf)
double cutoff_zeta_prime(double rho, double R);

/// Built-in horizontal bump of the perturbation family: phi0 = (g(|x|), 0, 0),
/// g(rho) = exp(1 - 1/(1-(rho/4)^2)) inside radius 4.
double perturbation_bump(double rho);

/// v-coordinate of the meromorphic family: v(z) = -(i/2) conj(z) + a z^k.
Complex meromorphic_v(int k, Complex a, Complex z);

}  // namespace skylab
