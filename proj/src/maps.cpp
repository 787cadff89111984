#include "skylab/maps.hpp"

#include <atomic>
#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "skylab/reduce.hpp"

namespace skylab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string fmt(Complex a) {
  std::ostringstream os;
  os << a.real() << (a.imag() < 0 ? "-" : "+") << std::abs(a.imag()) << "i";
  return os.str();
}
}  // namespace

void AnalyticMap::derivatives(double, double, Vec3&, Vec3&) const {
  throw std::logic_error("map family " + describe() + " has no exact derivatives");
}

double AnalyticMap::support_radius() const { return kInf; }

double skyrmion_theta(double rho, double r) { return M_PI - 2.0 * std::atan(rho / (2.0 * r)); }

double skyrmion_theta_prime(double rho, double r) {
  return -4.0 * r / (rho * rho + 4.0 * r * r);
}

namespace {
// exp(-1/s) smooth-partition transition; zeta drops 1 -> 0 across [R/4, R/2].
inline double bump_side(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
}  // namespace

double cutoff_zeta(double rho, double R) {
  const double t = (rho - R / 4.0) / (R / 4.0);
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = bump_side(1.0 - t), b = bump_side(t);
  return a / (a + b);
}

double cutoff_zeta_prime(double rho, double R) {
  const double t = (rho - R / 4.0) / (R / 4.0);
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = bump_side(1.0 - t), b = bump_side(t);
  const double da = -a / ((1.0 - t) * (1.0 - t));  // d/dt exp(-1/(1-t))
  const double db = b / (t * t);
  const double dzdt = (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
  return dzdt * 4.0 / R;
}

double perturbation_bump(double rho) {
  const double u = rho / 4.0;
  if (u >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

Complex meromorphic_v(int k, Complex a, Complex z) {
  return Complex(0.0, -0.5) * std::conj(z) + a * std::pow(z, k);
}

namespace {

// ---------------------------------------------------------------------------
// homogeneous

struct Homogeneous final : AnalyticMap {
  Vec3 value(double, double) const override { return e3; }
  bool has_exact_derivatives() const override { return true; }
  void derivatives(double, double, Vec3& d1, Vec3& d2) const override { d1 = d2 = Vec3{}; }
  double support_radius() const override { return 0.0; }
  GridSpec default_grid() const override { return {20.0, 513}; }
  std::string describe() const override { return "homogeneous"; }
};

// ---------------------------------------------------------------------------
// skyrmion / anti-skyrmion  (h and h-tilde, scaled by x -> x/2r)

// h(y) = (-2 y2, 2 y1, |y|^2 - 1) / (|y|^2 + 1)
inline Vec3 belavin_polyakov(double y1, double y2) {
  const double q = y1 * y1 + y2 * y2 + 1.0;
  return {-2.0 * y2 / q, 2.0 * y1 / q, (q - 2.0) / q};
}

inline void belavin_polyakov_jac(double y1, double y2, Vec3& dy1, Vec3& dy2) {
  const double q = y1 * y1 + y2 * y2 + 1.0;
  const double q2 = q * q;
  dy1 = {4.0 * y1 * y2 / q2, (2.0 * q - 4.0 * y1 * y1) / q2, 4.0 * y1 / q2};
  dy2 = {(4.0 * y2 * y2 - 2.0 * q) / q2, -4.0 * y1 * y2 / q2, 4.0 * y2 / q2};
}

struct Skyrmion final : AnalyticMap {
  double r;
  explicit Skyrmion(double r_) : r(r_) {
    if (!(r > 0.0)) throw std::invalid_argument("skyrmion: r must be positive");
  }
  Vec3 value(double x1, double x2) const override {
    return belavin_polyakov(x1 / (2.0 * r), x2 / (2.0 * r));
  }
  bool has_exact_derivatives() const override { return true; }
  void derivatives(double x1, double x2, Vec3& d1, Vec3& d2) const override {
    belavin_polyakov_jac(x1 / (2.0 * r), x2 / (2.0 * r), d1, d2);
    d1 = d1 / (2.0 * r);
    d2 = d2 / (2.0 * r);
  }
  GridSpec default_grid() const override { return {40.0 * r, 513}; }
  std::string describe() const override { return "skyrmion:r=" + fmt(r); }
};

struct AntiSkyrmion final : AnalyticMap {
  double r;
  explicit AntiSkyrmion(double r_) : r(r_) {
    if (!(r > 0.0)) throw std::invalid_argument("anti_skyrmion: r must be positive");
  }
  // h-tilde(y) = (-2 y1, 2 y2, |y|^2 - 1) / (|y|^2 + 1) = h(y2, y1) with axes swapped
  Vec3 value(double x1, double x2) const override {
    const Vec3 h = belavin_polyakov(x2 / (2.0 * r), x1 / (2.0 * r));
    return h;
  }
  bool has_exact_derivatives() const override { return true; }
  void derivatives(double x1, double x2, Vec3& d1, Vec3& d2) const override {
    Vec3 a, b;  // derivatives of h with respect to its own arguments (y1, y2)
    belavin_polyakov_jac(x2 / (2.0 * r), x1 / (2.0 * r), a, b);
    d1 = b / (2.0 * r);  // x1 enters as the second argument
    d2 = a / (2.0 * r);
  }
  GridSpec default_grid() const override { return {40.0 * r, 513}; }
  std::string describe() const override { return "anti_skyrmion:r=" + fmt(r); }
};

// ---------------------------------------------------------------------------
// equivariant profile maps: n = (cos(Phi) sin(Theta), sin(Phi) sin(Theta), cos(Theta)),
// Phi = m psi + psi0

struct Equivariant : AnalyticMap {
  std::function<double(double)> theta;
  int m;
  double psi0;
  double scale;
  double support = kInf;

  Equivariant(std::function<double(double)> t, int m_, double psi0_, double scale_)
      : theta(std::move(t)), m(m_), psi0(psi0_), scale(scale_) {}

  Vec3 value(double x1, double x2) const override {
    const double rho = std::hypot(x1, x2);
    const double th = theta(rho);
    const double psi = (rho > 0.0) ? std::atan2(x2, x1) : 0.0;
    const double phi = m * psi + psi0;
    const double st = std::sin(th);
    return {std::cos(phi) * st, std::sin(phi) * st, std::cos(th)};
  }
  double support_radius() const override { return support; }
  GridSpec default_grid() const override { return {scale, 513}; }
  std::string describe() const override {
    return "equivariant:m=" + std::to_string(m) + ",psi0=" + fmt(psi0);
  }
};

struct CutoffSkyrmion final : Equivariant {
  double r, R;
  bool anti;
  CutoffSkyrmion(double r_, double R_, bool anti_)
      : Equivariant({}, anti_ ? -1 : 1, anti_ ? M_PI : M_PI / 2.0, R_ / 2.0 + 2.0),
        r(r_),
        R(R_),
        anti(anti_) {
    if (!(r > 0.0) || !(R > 0.0))
      throw std::invalid_argument("cutoff family: r and R must be positive");
    const double rr = r, RR = R;
    theta = [rr, RR](double rho) { return cutoff_zeta(rho, RR) * skyrmion_theta(rho, rr); };
    support = R / 2.0;
  }
  GridSpec default_grid() const override { return {R / 2.0 + 2.0, 513}; }
  std::string describe() const override {
    return std::string(anti ? "cutoff_anti" : "cutoff_skyrmion") + ":r=" + fmt(r) +
           ",R=" + fmt(R);
  }
};

// ---------------------------------------------------------------------------
// multi-vortex gluing: |k| cutoff skyrmions at a_j = (10 j R, 0) on an e3 background

struct MultiVortex final : AnalyticMap {
  double r, R;
  int k;
  MapPtr ball;
  MultiVortex(double r_, double R_, int k_)
      : r(r_), R(R_), k(k_), ball(cutoff_skyrmion(r_, R_)) {
    if (k >= 0) throw std::invalid_argument("multi_vortex: k must be a negative integer");
    assert(10.0 * R > 2.0 * (R / 2.0) && "vortex supports must be disjoint");
  }
  Vec3 value(double x1, double x2) const override {
    for (int j = 1; j <= -k; ++j) {
      const double cx = 10.0 * j * R;
      const double dx = x1 - cx;
      if (std::abs(dx) <= R / 2.0 && std::abs(x2) <= R / 2.0) return ball->value(dx, x2);
    }
    return e3;
  }
  double support_radius() const override { return 10.0 * (-k) * R + R / 2.0; }
  GridSpec default_grid() const override {
    return {10.0 * (-k) * R + R, 1025};
  }
  std::string describe() const override {
    return "multi_vortex:r=" + fmt(r) + ",R=" + fmt(R) + ",k=" + std::to_string(k);
  }
  std::vector<std::pair<MapPtr, int>> additive_pieces() const override {
    return {{ball, -k}};
  }
};

// ---------------------------------------------------------------------------
// stretched map: a 1D skyrmion slice extended over a strip, closed by half-disk
// caps, plus |k+1| unit vortices that tune the degree.
//
// The slice profile is h(r x1, 0) with the radial cutoff at L, so the strip's
// energy per unit height is the 1D integrand 2(1-r^2)/(r^2 x1^2 + 1)^2 up to
// cutoff tails. Strip: |x2| <= L/2; caps are translates of the full cutoff
// map above/below, so together they contribute one degree -1 vortex.

struct Stretched final : AnalyticMap {
  double r, L;
  int k;
  MapPtr body;    // cutoff skyrmion with core scale 1/(2r), cutoff radius L
  MapPtr vortex;  // unit vortex h^1_1 (k <= -1) or anti h~^1_1 (k >= 0)

  Stretched(double r_, double L_, int k_) : r(r_), L(L_), k(k_) {
    if (!(r > 0.0) || !(L > 0.0)) throw std::invalid_argument("stretched: r, L must be positive");
    body = cutoff_skyrmion(1.0 / (2.0 * r), L);
    vortex = (k >= 0) ? cutoff_anti_skyrmion(1.0, 1.0) : cutoff_skyrmion(1.0, 1.0);
  }
  Vec3 value(double x1, double x2) const override {
    if (std::abs(x1) <= L && std::abs(x2) <= L / 2.0) return body->value(x1, 0.0);
    if (x2 > L / 2.0 && std::hypot(x1, x2 - L / 2.0) <= L / 2.0)
      return body->value(x1, x2 - L / 2.0);
    if (x2 < -L / 2.0 && std::hypot(x1, x2 + L / 2.0) <= L / 2.0)
      return body->value(x1, x2 + L / 2.0);
    const int nv = std::abs(k + 1);
    for (int j = 1; j <= nv; ++j) {
      const double cx = 10.0 * (L + j);
      if (std::hypot(x1 - cx, x2) <= 0.5) return vortex->value(x1 - cx, x2);
    }
    return e3;
  }
  double support_radius() const override {
    const int nv = std::abs(k + 1);
    return nv > 0 ? 10.0 * (L + nv) + 0.5 : L;
  }
  // S = 1.28 L puts the seam rows x2 = +-L/2 on grid nodes for the usual
  // (1 + 512 m)-point resolutions. Vortices are evaluated separately.
  GridSpec default_grid() const override { return {1.28 * L, 513}; }
  std::string describe() const override {
    return "stretched:r=" + fmt(r) + ",L=" + fmt(L) + ",k=" + std::to_string(k);
  }
  std::vector<std::pair<MapPtr, int>> additive_pieces() const override {
    const int nv = std::abs(k + 1);
    if (nv == 0) return {};
    return {{stretched(r, L, -1), 1}, {vortex, nv}};
  }
};

// ---------------------------------------------------------------------------
// distorted skyrmion: n^a = F(X^a x) with X^a = [[a1, -1/2-a2], [-1/2+a2, a1]]

inline Vec3 chart_point(double u1, double u2) {
  const double q = u1 * u1 + u2 * u2 + 1.0;
  return {2.0 * u1 / q, -2.0 * u2 / q, (q - 2.0) / q};
}

inline void chart_point_jac(double u1, double u2, Vec3& du1, Vec3& du2) {
  const double q = u1 * u1 + u2 * u2 + 1.0;
  const double q2 = q * q;
  du1 = {(2.0 * q - 4.0 * u1 * u1) / q2, 4.0 * u1 * u2 / q2, 4.0 * u1 / q2};
  du2 = {-4.0 * u1 * u2 / q2, (4.0 * u2 * u2 - 2.0 * q) / q2, 4.0 * u2 / q2};
}

struct Distorted final : AnalyticMap {
  Complex a;
  double m11, m12, m21, m22;  // X^a
  Distorted(Complex a_) : a(a_) {
    if (std::abs(std::abs(a) - 0.5) < 1e-9)
      throw std::invalid_argument("distorted: |a| = 1/2 is degenerate (det X^a = 0)");
    m11 = a.real();
    m12 = -0.5 - a.imag();
    m21 = -0.5 + a.imag();
    m22 = a.real();
  }
  Vec3 value(double x1, double x2) const override {
    return chart_point(m11 * x1 + m12 * x2, m21 * x1 + m22 * x2);
  }
  bool has_exact_derivatives() const override { return true; }
  void derivatives(double x1, double x2, Vec3& d1, Vec3& d2) const override {
    Vec3 du1, du2;
    chart_point_jac(m11 * x1 + m12 * x2, m21 * x1 + m22 * x2, du1, du2);
    d1 = du1 * m11 + du2 * m21;
    d2 = du1 * m12 + du2 * m22;
  }
  GridSpec default_grid() const override {
    // singular values of X^a are | |a| -/+ 1/2 |: the core stretches like
    // 1/sv_min while the finest feature narrows like 1/sv_max
    const double sv_min = std::abs(std::abs(a) - 0.5);
    const double S = std::min(30.0 / sv_min, 600.0);
    return {S, sv_min < 0.3 ? 1025 : 513};
  }
  std::string describe() const override { return "distorted:a=" + fmt(a); }
};

// ---------------------------------------------------------------------------
// meromorphic family: v = -(i/2) conj(z) + a z^k through the north chart

struct Meromorphic final : AnalyticMap {
  int k;
  Complex a;
  Meromorphic(int k_, Complex a_) : k(k_), a(a_) {
    if (k != 0 && a == Complex{}) throw std::invalid_argument("meromorphic: a must be nonzero");
    if (k == 1)
      throw std::invalid_argument("meromorphic: k=1 is handled by the distorted family");
  }
  Vec3 value(double x1, double x2) const override {
    const Complex z{x1, x2};
    if (k < 0) {
      const double az = std::abs(z);
      if (az == 0.0) return e3;  // pole of f: the map extends by the northpole
      if (az < 1e-3) {
        // south-chart evaluation: w = z^{|k|} / (-(i/2) conj(z) z^{|k|} + a)
        const Complex zm = std::pow(z, -k);
        const Complex w = zm / (Complex(0.0, -0.5) * std::conj(z) * zm + a);
        return south_chart_to_sphere(w);
      }
    }
    return north_chart_to_sphere(meromorphic_v(k, a, z));
  }
  bool has_exact_derivatives() const override { return k >= 0; }
  void derivatives(double x1, double x2, Vec3& d1, Vec3& d2) const override {
    if (k < 0) {
      AnalyticMap::derivatives(x1, x2, d1, d2);
      return;
    }
    const Complex z{x1, x2};
    const Complex v = meromorphic_v(k, a, z);
    if (std::norm(v) > 1e16) {
      d1 = d2 = Vec3{};
      return;
    }
    const Complex vz = (k == 0) ? Complex{} : a * double(k) * std::pow(z, k - 1);
    const Complex vzb{0.0, -0.5};
    const Complex dvdx = vz + vzb;
    const Complex dvdy = Complex(0.0, 1.0) * (vz - vzb);
    Vec3 du1, du2;
    chart_point_jac(v.real(), v.imag(), du1, du2);
    d1 = du1 * dvdx.real() + du2 * dvdx.imag();
    d2 = du1 * dvdy.real() + du2 * dvdy.imag();
  }
  GridSpec default_grid() const override {
    if (k == 0) return {40.0 + 2.0 * std::abs(a), 513};  // translated skyrmion
    // the far field is always v ~ -(i/2) conj(z), a core-1 skyrmion tail, so
    // the grid must reach well past both the Z0/Z1 scale and that tail
    const double gamma = std::pow(2.0 * std::abs(a), -1.0 / (k - 1.0));
    const double heuristic = std::pow(4.0 * std::abs(a), 1.0 / (1.0 - k));
    const double outer = std::max({2.0, gamma, heuristic});
    // negative powers put a northpole at the origin; resolving that inner
    // structure needs the finer grid
    return {std::max(40.0, 4.0 * outer), k < 0 ? 1025 : 513};
  }
  std::string describe() const override {
    return "meromorphic:k=" + std::to_string(k) + ",a=" + fmt(a);
  }
};

// ---------------------------------------------------------------------------
// perturbed homogeneous state: n_t = (e3 + t phi_lambda) / |e3 + t phi_lambda|

struct PerturbedHomogeneous final : AnalyticMap {
  double lambda, t;
  PerturbedHomogeneous(double lambda_, double t_) : lambda(lambda_), t(t_) {
    if (!(lambda > 0.0)) throw std::invalid_argument("perturbed: lambda must be positive");
  }
  Vec3 value(double x1, double x2) const override {
    const double g = perturbation_bump(std::hypot(x1, x2) / lambda);
    const Vec3 v = e3 + Vec3{t * g, 0.0, 0.0};
    const double norm2 = v.norm2();
    if (!(norm2 > 0.0)) throw std::domain_error("perturbed: degenerate normalization");
    return v / std::sqrt(norm2);
  }
  double support_radius() const override { return 4.0 * lambda; }
  GridSpec default_grid() const override { return {4.0 * lambda + 2.0, 513}; }
  std::string describe() const override {
    return "perturbed:lambda=" + fmt(lambda) + ",t=" + fmt(t);
  }
};

}  // namespace

MapPtr homogeneous() { return std::make_shared<Homogeneous>(); }
MapPtr skyrmion(double r) { return std::make_shared<Skyrmion>(r); }
MapPtr anti_skyrmion(double r) { return std::make_shared<AntiSkyrmion>(r); }
MapPtr cutoff_skyrmion(double r, double R) { return std::make_shared<CutoffSkyrmion>(r, R, false); }
MapPtr cutoff_anti_skyrmion(double r, double R) {
  return std::make_shared<CutoffSkyrmion>(r, R, true);
}
MapPtr multi_vortex(double r, double R, int k) { return std::make_shared<MultiVortex>(r, R, k); }
MapPtr stretched(double r, double L, int k) { return std::make_shared<Stretched>(r, L, k); }
MapPtr equivariant(std::function<double(double)> theta_profile, int m, double psi0,
                   double scale_hint) {
  return std::make_shared<Equivariant>(std::move(theta_profile), m, psi0, scale_hint);
}
MapPtr distorted(Complex a) { return std::make_shared<Distorted>(a); }
MapPtr meromorphic(int k, Complex a) { return std::make_shared<Meromorphic>(k, a); }
MapPtr perturbed_homogeneous(double lambda, double t) {
  return std::make_shared<PerturbedHomogeneous>(lambda, t);
}

SphereField sample(const AnalyticMap& map, const GridSpec& spec) {
  SphereField f(spec);
  const int n = spec.samples;
  std::atomic<int> bad_i{-1}, bad_j{-1};
  parallel_rows(n, [&](int j) {
    const double x2 = spec.coord(j);
    for (int i = 0; i < n; ++i) {
      const Vec3 v = map.value(spec.coord(i), x2);
      if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
        bad_i = i;
        bad_j = j;
        return;
      }
      f.set(i, j, v.normalized());
    }
  });
  if (bad_i >= 0) {
    std::ostringstream os;
    os << "sample(" << map.describe() << "): non-finite value at node (" << bad_i << ", "
       << bad_j << ") = (" << spec.coord(bad_i) << ", " << spec.coord(bad_j) << ")";
    throw std::runtime_error(os.str());
  }
  return f;
}

}  // namespace skylab
