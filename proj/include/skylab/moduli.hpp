#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skylab/grid.hpp"

namespace skylab {

/// Parameters of the endpoint solution family f(z) = a z^k.
struct MeromorphicParams {
  int k = 2;
  Complex a{0.0, 0.1};
};

/// |v(z)|^2 for v = -(i/2) conj(z) + a z^k, directly from the polar formula.
double v_abs2(const MeromorphicParams& p, double x, double y);

/// Preimage of the southpole. Either a finite point set or (k = -1 only)
/// a circle |z|^2 = circle_radius2.
struct Z0Set {
  std::vector<Complex> points;
  std::optional<double> circle_radius2;
  bool empty() const { return points.empty() && !circle_radius2; }
};

/// Analytic zeros cross-checked by 2D Newton refinement on v.
Z0Set z0_points(const MeromorphicParams& p);

/// One connected component of the extracted level set { |v|^2 = 1 }.
struct LevelSetCurve {
  std::vector<std::array<double, 2>> pts;
  bool closed = false;
  int component_id = 0;
  std::vector<int> enclosed_z0;  // indices into the Z0 point list
};

struct ModuliWindow {
  double radius = 0;  // square window [-radius, radius]^2; 0 = automatic
  int cells = 768;    // marching-squares cells per axis
};

struct Z1Extraction {
  std::vector<LevelSetCurve> curves;
  double window_radius = 0;
  bool window_grew = false;  // an open curve forced auto-doubling
  int open_components = 0;
};

Z1Extraction z1_extract(const MeromorphicParams& p, ModuliWindow window = {});

/// Bifurcation threshold a* of the Z1 topology; |k| >= 2.
double threshold_a_star(int k);

struct ScanRow {
  double abs_a = 0;
  int components = 0;
  bool nested = false;    // some component encloses another (k <= -2 subcritical)
  bool resolved = true;   // count stable under resolution doubling
};

/// Component counts along an |a| schedule given as multiples of a*
/// (arg a = pi/2 throughout, matching the solution-family plots).
std::vector<ScanRow> bifurcation_scan(int k, std::span<const double> ratios_of_a_star,
                                      int cells = 768);

/// Hausdorff distance between the extracted Z1 and its rotation by
/// `angle`; the symmetry claim uses angle = 2 pi / (k+1) resp. 2 pi / (|k|-1).
double z1_rotation_deviation(const Z1Extraction& z1, double angle);

/// Convenience: deviation under the family's own rotational symmetry.
double z1_symmetry_check(const MeromorphicParams& p, ModuliWindow window = {});

void emit_figure_svg(const MeromorphicParams& p, const std::string& path,
                     ModuliWindow window = {});
void emit_figure_csv(const MeromorphicParams& p, const std::string& path,
                     ModuliWindow window = {});

/// Reads back an emit_figure CSV and counts distinct z1 components.
int count_csv_z1_components(const std::string& path);

}  // namespace skylab
