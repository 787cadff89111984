#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "skylab/vec3.hpp"

namespace skylab {

using Complex = std::complex<double>;

/// Uniform N x N grid over the square [-S, S]^2. Odd N keeps the origin on a
/// node, which every default here uses.
struct GridSpec {
  double half_width = 20.0;  // S
  int samples = 513;         // N

  double spacing() const { return 2.0 * half_width / (samples - 1); }
  double coord(int i) const { return -half_width + i * spacing(); }
  bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(double half_width, int samples);

/// Sphere-valued field on a GridSpec. Immutable in all numeric kernels; the
/// far field is e3: queries outside the square return e3 exactly.
class SphereField {
 public:
  explicit SphereField(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int n() const { return spec_.samples; }

  Vec3 at(int i, int j) const {
    const double* p = data_.data() + 3 * (static_cast<std::size_t>(j) * n() + i);
    return {p[0], p[1], p[2]};
  }
  void set(int i, int j, const Vec3& v) {
    double* p = data_.data() + 3 * (static_cast<std::size_t>(j) * n() + i);
    p[0] = v.x; p[1] = v.y; p[2] = v.z;
  }

  /// Nearest-node value; e3 for points outside the grid square.
  Vec3 value_or_far_field(double x1, double x2) const;

  std::span<const double> raw() const { return data_; }
  std::span<double> raw() { return data_; }

  /// Max deviation of |n| from 1 over all nodes.
  double max_norm_error() const;

 private:
  GridSpec spec_;
  std::vector<double> data_;  // row-major (j, i), 3 doubles per node
};

// Stereographic charts. North chart: v = (1 + n3) / (n1 + i n2); the
// northpole is v = infinity, the southpole v = 0. South chart:
// w = (n1 + i n2) / (1 + n3) = 1/v; the northpole is w = 0.
Vec3 north_chart_to_sphere(Complex v);
Vec3 north_chart_infinity();  // = e3
Vec3 south_chart_to_sphere(Complex w);
Complex sphere_to_north_chart(const Vec3& n);
Complex sphere_to_south_chart(const Vec3& n);

/// A chart coordinate together with its chart tag. On the overlap the two
/// representations are related by w = 1/v.
struct ChartPoint {
  enum class Chart { north, south };
  Complex coord{};
  Chart chart = Chart::north;

  static ChartPoint north(Complex v) { return {v, Chart::north}; }
  static ChartPoint south(Complex w) { return {w, Chart::south}; }

  Vec3 to_sphere() const {
    return chart == Chart::north ? north_chart_to_sphere(coord) : south_chart_to_sphere(coord);
  }
  /// Same sphere point in the other chart; requires coord != 0.
  ChartPoint other_chart() const { return {1.0 / coord, chart == Chart::north ? Chart::south : Chart::north}; }
};

// Metrics on the discretized energy space:
//   d_M  = ||n - m||_L4 + ||grad(n - m)||_L2
//   d_M' = ||n - m||_L2 + ||grad(n - m)||_L2
double metric_dM(const SphereField& n, const SphereField& m);
double metric_dMprime(const SphereField& n, const SphereField& m);

// Norms of the difference field, exposed for ratio diagnostics.
struct DiffNorms {
  double l2 = 0, l4 = 0, grad_l2 = 0;
};
DiffNorms difference_norms(const SphereField& n, const SphereField& m);

// Binary container: 32-byte header (magic "SFLD", u32 version, u32 N,
// u32 reserved, f64 S, 8 zero bytes), then N*N row-major (n1,n2,n3) doubles.
void write_sfld(const SphereField& f, const std::string& path);
SphereField read_sfld(const std::string& path);

/// CSV export with header x1,x2,n1,n2,n3.
void write_field_csv(const SphereField& f, const std::string& path);

}  // namespace skylab
