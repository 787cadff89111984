#include "skylab/grid.hpp"

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "skylab/reduce.hpp"
#include "skylab/stencil.hpp"

namespace skylab {

namespace {
int thread_cap = 0;
}

int reduction_threads() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
  int cap = thread_cap;
  if (cap == 0) {
    if (const char* env = std::getenv("SKYRMION_LAB_THREADS")) {
      int v = std::atoi(env);
      if (v > 0) cap = v;
    }
  }
  if (cap > 0 && cap < n) n = cap;
  return n > 0 ? n : 1;
#else
  return 1;
#endif
}

void set_thread_cap(int n) { thread_cap = n; }

GridSpec make_grid(double half_width, int samples) {
  if (!(half_width > 0.0)) throw std::invalid_argument("grid half width must be positive");
  if (samples < 3) throw std::invalid_argument("grid needs at least 3 samples per axis");
  return GridSpec{half_width, samples};
}

SphereField::SphereField(const GridSpec& spec)
    : spec_(make_grid(spec.half_width, spec.samples)),
      data_(3 * static_cast<std::size_t>(spec.samples) * spec.samples) {
  for (std::size_t p = 0; p < data_.size(); p += 3) data_[p + 2] = 1.0;  // e3 everywhere
}

Vec3 SphereField::value_or_far_field(double x1, double x2) const {
  const double S = spec_.half_width;
  if (x1 < -S || x1 > S || x2 < -S || x2 > S) return e3;
  const double h = spec_.spacing();
  int i = static_cast<int>(std::lround((x1 + S) / h));
  int j = static_cast<int>(std::lround((x2 + S) / h));
  i = std::min(std::max(i, 0), n() - 1);
  j = std::min(std::max(j, 0), n() - 1);
  return at(i, j);
}

double SphereField::max_norm_error() const {
  double worst = 0.0;
  for (std::size_t p = 0; p < data_.size(); p += 3) {
    Vec3 v{data_[p], data_[p + 1], data_[p + 2]};
    worst = std::max(worst, std::abs(v.norm() - 1.0));
  }
  return worst;
}

Vec3 north_chart_to_sphere(Complex v) {
  const double m2 = std::norm(v);
  if (!std::isfinite(m2) || m2 > 1e16) return e3;
  const double d = m2 + 1.0;
  return {2.0 * v.real() / d, -2.0 * v.imag() / d, (m2 - 1.0) / d};
}

Vec3 north_chart_infinity() { return e3; }

Vec3 south_chart_to_sphere(Complex w) {
  const double m2 = std::norm(w);
  if (!std::isfinite(m2) || m2 > 1e16) return {0.0, 0.0, -1.0};
  const double d = 1.0 + m2;
  return {2.0 * w.real() / d, 2.0 * w.imag() / d, (1.0 - m2) / d};
}

Complex sphere_to_north_chart(const Vec3& n) {
  return (1.0 + n.z) / Complex(n.x, n.y);
}

Complex sphere_to_south_chart(const Vec3& n) {
  return Complex(n.x, n.y) / (1.0 + n.z);
}

namespace {

inline Vec3 d_line(const SphereField& f, int i, int j, bool along_x1) {
  auto node = [&](int t) { return along_x1 ? f.at(t, j) : f.at(i, t); };
  return line_derivative(node, along_x1 ? i : j, f.n(), f.spec().spacing());
}

}  // namespace

DiffNorms difference_norms(const SphereField& n, const SphereField& m) {
  if (!(n.spec() == m.spec())) throw std::invalid_argument("difference_norms: grid specs differ");
  const int N = n.n();
  const double h = n.spec().spacing();
  auto sums = grid_reduce<3>(N, [&](int i, int j, double* acc) {
    double w = h * h;
    if (i == 0 || i == N - 1) w *= 0.5;
    if (j == 0 || j == N - 1) w *= 0.5;
    const Vec3 d = n.at(i, j) - m.at(i, j);
    const double d2 = d.norm2();
    const Vec3 g1 = d_line(n, i, j, true) - d_line(m, i, j, true);
    const Vec3 g2 = d_line(n, i, j, false) - d_line(m, i, j, false);
    acc[0] = w * d2;
    acc[1] = w * d2 * d2;
    acc[2] = w * (g1.norm2() + g2.norm2());
  });
  return {std::sqrt(sums[0]), std::pow(sums[1], 0.25), std::sqrt(sums[2])};
}

double metric_dM(const SphereField& n, const SphereField& m) {
  const DiffNorms d = difference_norms(n, m);
  return d.l4 + d.grad_l2;
}

double metric_dMprime(const SphereField& n, const SphereField& m) {
  const DiffNorms d = difference_norms(n, m);
  return d.l2 + d.grad_l2;
}

namespace {
constexpr char kMagic[4] = {'S', 'F', 'L', 'D'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_sfld(const SphereField& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char header[32] = {};
  std::memcpy(header, kMagic, 4);
  std::uint32_t version = kVersion, n = static_cast<std::uint32_t>(f.n()), reserved = 0;
  std::memcpy(header + 4, &version, 4);
  std::memcpy(header + 8, &n, 4);
  std::memcpy(header + 12, &reserved, 4);
  double S = f.spec().half_width;
  std::memcpy(header + 16, &S, 8);
  out.write(header, 32);
  out.write(reinterpret_cast<const char*>(f.raw().data()),
            static_cast<std::streamsize>(f.raw().size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

SphereField read_sfld(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char header[32];
  in.read(header, 32);
  if (!in || std::memcmp(header, kMagic, 4) != 0)
    throw std::runtime_error("not an SFLD file: " + path);
  std::uint32_t version, n;
  std::memcpy(&version, header + 4, 4);
  std::memcpy(&n, header + 8, 4);
  if (version != kVersion) throw std::runtime_error("unsupported SFLD version");
  double S;
  std::memcpy(&S, header + 16, 8);
  SphereField f(make_grid(S, static_cast<int>(n)));
  in.read(reinterpret_cast<char*>(f.raw().data()),
          static_cast<std::streamsize>(f.raw().size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated SFLD file: " + path);
  return f;
}

void write_field_csv(const SphereField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "x1,x2,n1,n2,n3\n";
  out.precision(17);
  for (int j = 0; j < f.n(); ++j)
    for (int i = 0; i < f.n(); ++i) {
      const Vec3 v = f.at(i, j);
      out << f.spec().coord(i) << ',' << f.spec().coord(j) << ',' << v.x << ',' << v.y << ','
          << v.z << '\n';
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace skylab
