#include "skylab/energy.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "skylab/reduce.hpp"
#include "skylab/stencil.hpp"

namespace skylab {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kFourPi = 4.0 * M_PI;

// The same central stencil is used in both helicity estimators; it is skew,
// so the direct and integrated-by-parts forms agree exactly on fields that
// equal e3 in a collar near the boundary.
struct Stencils {
  const SphereField& f;
  int n;
  double h;

  explicit Stencils(const SphereField& field)
      : f(field), n(field.n()), h(field.spec().spacing()) {}

  Vec3 d1(int i, int j) const {
    return line_derivative([&](int t) { return f.at(t, j); }, i, n, h);
  }
  Vec3 d2(int i, int j) const {
    return line_derivative([&](int t) { return f.at(i, t); }, j, n, h);
  }

  double weight(int i, int j) const {
    double w = 1.0;
    if (i == 0 || i == n - 1) w *= 0.5;
    if (j == 0 || j == n - 1) w *= 0.5;
    return w;
  }
};

}  // namespace

EnergyBreakdown evaluate(const SphereField& field, double r, double h) {
  if (!(r > 0.0)) throw std::invalid_argument("evaluate: r must be positive");
  const Stencils st(field);
  const int n = st.n;
  const double cell = field.spec().spacing() * field.spec().spacing();
  const double invr = 1.0 / r;

  // lanes: D, H_ibp, H_direct, V, Z, A, q-density, residual density,
  //        |d1 + n x d2|^2 / 2, |d1 - n x d2|^2 / 2
  auto acc = grid_reduce<10>(n, [&](int i, int j, double* out) {
    const Vec3 nv = field.at(i, j);
    const Vec3 g1 = st.d1(i, j), g2 = st.d2(i, j);
    const double w = st.weight(i, j) * cell;

    const double one_m_n3 = 1.0 - nv.z;
    out[0] = w * 0.5 * (g1.norm2() + g2.norm2());
    out[1] = w * 2.0 * (nv.z - 1.0) * (g1.y - g2.x);
    out[2] = w * (nv.x * g2.z - nv.y * g1.z + (nv.z - 1.0) * (g1.y - g2.x));

    out[3] = w * 0.5 * one_m_n3 * one_m_n3;
    out[4] = w * one_m_n3;
    out[5] = w * 0.5 * (1.0 - nv.z * nv.z);

    const Vec3 cr = g1.cross(g2);
    out[6] = w * nv.dot(cr);

    // helical derivatives: D_j^r = d_j - (1/r) e_j x n
    const Vec3 h1 = g1 - Vec3{0.0, -nv.z, nv.y} * invr;
    const Vec3 h2 = g2 - Vec3{nv.z, 0.0, -nv.x} * invr;
    const Vec3 bog = h1 + nv.cross(h2);
    out[7] = w * bog.norm2();

    const Vec3 nxg2 = nv.cross(g2);
    out[8] = w * 0.5 * (g1 + nxg2).norm2();
    out[9] = w * 0.5 * (g1 - nxg2).norm2();
  });

  bool finite = true;
  for (double lane : acc) finite = finite && std::isfinite(lane);
  if (!finite) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Vec3 nv = field.at(i, j);
        const Vec3 g1 = st.d1(i, j), g2 = st.d2(i, j);
        if (!std::isfinite(nv.norm2()) || !std::isfinite(g1.norm2()) ||
            !std::isfinite(g2.norm2()))
          throw std::runtime_error("evaluate: non-finite energy density at node (" +
                                   std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    throw std::runtime_error("evaluate: non-finite energy density");
  }

  EnergyBreakdown b;
  b.D = acc[0];
  b.H_ibp = acc[1];
  b.H_direct = acc[2];
  b.V = acc[3];
  b.Z = acc[4];
  b.A = acc[5];
  b.Q_raw = acc[6] / kFourPi;
  b.Q_int = static_cast<int>(std::lround(b.Q_raw));
  b.degree_resolved = std::abs(b.Q_raw - b.Q_int) <= 0.05;
  b.residual = 0.5 * r * r * acc[7];
  b.E_r = b.D + r * b.H_ibp + b.V;
  b.E_rh = b.E_r + h * b.Z;
  b.fact_gap_e11 = b.E_r - kFourPi * r * r * b.Q_raw - b.residual - (1.0 - r * r) * b.D;
  // 0.5 int |d1 -/+ n x d2|^2 = D +/- 4 pi Q (anti-holomorphic maps kill the '-' term)
  b.fact_gap_minus = acc[9] - (b.D + kFourPi * b.Q_raw);
  b.fact_gap_plus = acc[8] - (b.D - kFourPi * b.Q_raw);
  b.fact_gap = b.fact_gap_e11;
  if (std::abs(b.fact_gap_plus) > std::abs(b.fact_gap)) b.fact_gap = b.fact_gap_plus;
  if (std::abs(b.fact_gap_minus) > std::abs(b.fact_gap)) b.fact_gap = b.fact_gap_minus;
  b.r = r;
  b.h = h;
  b.N = n;
  b.S = field.spec().half_width;
  return b;
}

double helicity_direct(const SphereField& field) {
  const Stencils st(field);
  const double cell = field.spec().spacing() * field.spec().spacing();
  return grid_reduce<1>(st.n, [&](int i, int j, double* out) {
    const Vec3 nv = field.at(i, j);
    const Vec3 g1 = st.d1(i, j), g2 = st.d2(i, j);
    out[0] = st.weight(i, j) * cell *
             (nv.x * g2.z - nv.y * g1.z + (nv.z - 1.0) * (g1.y - g2.x));
  })[0];
}

double helicity_ibp(const SphereField& field) {
  const Stencils st(field);
  const double cell = field.spec().spacing() * field.spec().spacing();
  return grid_reduce<1>(st.n, [&](int i, int j, double* out) {
    const Vec3 nv = field.at(i, j);
    const Vec3 g1 = st.d1(i, j), g2 = st.d2(i, j);
    out[0] = st.weight(i, j) * cell * 2.0 * (nv.z - 1.0) * (g1.y - g2.x);
  })[0];
}

std::pair<double, int> degree(const SphereField& field) {
  const Stencils st(field);
  const double cell = field.spec().spacing() * field.spec().spacing();
  const double q = grid_reduce<1>(st.n, [&](int i, int j, double* out) {
                     const Vec3 nv = field.at(i, j);
                     out[0] = st.weight(i, j) * cell * nv.dot(st.d1(i, j).cross(st.d2(i, j)));
                   })[0] /
                   kFourPi;
  return {q, static_cast<int>(std::lround(q))};
}

double equivariant_degree(double theta0, double theta_inf, double phi_winding) {
  if (std::abs(theta0 / M_PI - std::round(theta0 / M_PI)) > 1e-9)
    throw std::domain_error("equivariant_degree: Theta(0) must lie in pi*Z");
  if (std::abs(theta_inf / kTwoPi - std::round(theta_inf / kTwoPi)) > 1e-9)
    throw std::domain_error("equivariant_degree: Theta(inf) must lie in 2*pi*Z");
  return (std::cos(theta0) - std::cos(theta_inf)) * phi_winding / kFourPi;
}

double bogomolnyi_residual(const SphereField& field, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("bogomolnyi_residual: r must be positive");
  const Stencils st(field);
  const double cell = field.spec().spacing() * field.spec().spacing();
  const double invr = 1.0 / r;
  const double s = grid_reduce<1>(st.n, [&](int i, int j, double* out) {
    const Vec3 nv = field.at(i, j);
    const Vec3 h1 = st.d1(i, j) - Vec3{0.0, -nv.z, nv.y} * invr;
    const Vec3 h2 = st.d2(i, j) - Vec3{nv.z, 0.0, -nv.x} * invr;
    out[0] = st.weight(i, j) * cell * (h1 + nv.cross(h2)).norm2();
  })[0];
  return 0.5 * r * r * s;
}

double factorization_gap(const SphereField& field, double r) { return evaluate(field, r).fact_gap; }

double helical_identity_gap(const SphereField& field, double r) {
  const EnergyBreakdown b = evaluate(field, r);
  return b.D - kFourPi * b.Q_raw - b.V / (r * r);
}

TailCorrected evaluate_with_tail(const AnalyticMap& map, double r, double h) {
  TailCorrected out;
  const GridSpec base = map.default_grid();
  const GridSpec wide = make_grid(2.0 * base.half_width, 2 * base.samples - 1);
  out.base = evaluate(sample(map, base), r, h);
  out.wide = evaluate(sample(map, wide), r, h);
  out.tail_estimate = std::abs(out.base.E_r - out.wide.E_r);
  // integrand tails fall off like 1/S^2, so the doubled window removes 3/4
  // of the remaining truncation error
  out.E_r = out.wide.E_r + (out.wide.E_r - out.base.E_r) / 3.0;
  out.D = out.wide.D + (out.wide.D - out.base.D) / 3.0;
  return out;
}

BrsResult brs_energy(const AnalyticMap& map, std::span<const double> radii) {
  if (radii.size() < 2) throw std::invalid_argument("brs_energy: need at least two radii");
  BrsResult res;
  res.e1 = evaluate(sample(map, map.default_grid()), 1.0).E_r;
  constexpr int kSamples = 8192;
  for (double R : radii) {
    double acc = 0.0;
    for (int s = 0; s < kSamples; ++s) {
      const double th = kTwoPi * s / kSamples;
      const Vec3 nv = map.value(R * std::cos(th), R * std::sin(th));
      acc += (-nv.x * std::sin(th) + nv.y * std::cos(th)) * R;
    }
    res.contour_values.push_back(acc * kTwoPi / kSamples);
  }
  const double last = res.contour_values.back();
  const double prev = res.contour_values[res.contour_values.size() - 2];
  res.converged = std::abs(last - prev) <= 1e-2 * (1.0 + std::abs(last));
  res.correction = last;
  res.total = res.e1 + res.correction;
  return res;
}

std::string to_json(const EnergyBreakdown& b) {
  nlohmann::ordered_json j;
  j["D"] = b.D;
  j["H_ibp"] = b.H_ibp;
  j["H_direct"] = b.H_direct;
  j["V"] = b.V;
  j["Z"] = b.Z;
  j["A"] = b.A;
  j["E_r"] = b.E_r;
  j["E_rh"] = b.E_rh;
  j["Q_raw"] = b.Q_raw;
  j["Q_int"] = b.Q_int;
  j["residual"] = b.residual;
  j["fact_gap"] = b.fact_gap;
  j["r"] = b.r;
  j["h"] = b.h;
  j["N"] = b.N;
  j["S"] = b.S;
  return j.dump(2) + "\n";
}

EnergyBreakdown breakdown_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EnergyBreakdown b;
  b.D = j.at("D");
  b.H_ibp = j.at("H_ibp");
  b.H_direct = j.at("H_direct");
  b.V = j.at("V");
  b.Z = j.at("Z");
  b.A = j.at("A");
  b.E_r = j.at("E_r");
  b.E_rh = j.at("E_rh");
  b.Q_raw = j.at("Q_raw");
  b.Q_int = j.at("Q_int");
  b.residual = j.at("residual");
  b.fact_gap = j.at("fact_gap");
  b.r = j.at("r");
  b.h = j.at("h");
  b.N = j.at("N");
  b.S = j.at("S");
  b.degree_resolved = std::abs(b.Q_raw - b.Q_int) <= 0.05;
  return b;
}

namespace reference {

namespace {
// same discrete operator as the parallel kernels, accumulated naively
Vec3 ref_d(const SphereField& f, int i, int j, bool along_x1) {
  const int n = f.n();
  const double h = f.spec().spacing();
  const double inv2h = 0.5 / h;
  auto at = [&](int t) { return along_x1 ? f.at(t, j) : f.at(i, t); };
  const int t = along_x1 ? i : j;
  if (n >= 5 && t >= 2 && t <= n - 3)
    return (at(t - 2) - at(t + 2) + (at(t + 1) - at(t - 1)) * 8.0) / (12.0 * h);
  if (t == 0) return (at(0) * -3.0 + at(1) * 4.0 - at(2)) * inv2h;
  if (t == n - 1) return (at(n - 1) * 3.0 - at(n - 2) * 4.0 + at(n - 3)) * inv2h;
  return (at(t + 1) - at(t - 1)) * inv2h;
}

double ref_w(const SphereField& f, int i, int j) {
  const int n = f.n();
  double w = f.spec().spacing() * f.spec().spacing();
  if (i == 0 || i == n - 1) w *= 0.5;
  if (j == 0 || j == n - 1) w *= 0.5;
  return w;
}
}  // namespace

double dirichlet(const SphereField& f) {
  double s = 0.0;
  for (int j = 0; j < f.n(); ++j)
    for (int i = 0; i < f.n(); ++i)
      s += ref_w(f, i, j) * 0.5 * (ref_d(f, i, j, true).norm2() + ref_d(f, i, j, false).norm2());
  return s;
}

double helicity_ibp(const SphereField& f) {
  double s = 0.0;
  for (int j = 0; j < f.n(); ++j)
    for (int i = 0; i < f.n(); ++i)
      s += ref_w(f, i, j) * 2.0 * (f.at(i, j).z - 1.0) *
           (ref_d(f, i, j, true).y - ref_d(f, i, j, false).x);
  return s;
}

double potential(const SphereField& f) {
  double s = 0.0;
  for (int j = 0; j < f.n(); ++j)
    for (int i = 0; i < f.n(); ++i) {
      const double d = 1.0 - f.at(i, j).z;
      s += ref_w(f, i, j) * 0.5 * d * d;
    }
  return s;
}

double degree_raw(const SphereField& f) {
  double s = 0.0;
  for (int j = 0; j < f.n(); ++j)
    for (int i = 0; i < f.n(); ++i)
      s += ref_w(f, i, j) * f.at(i, j).dot(ref_d(f, i, j, true).cross(ref_d(f, i, j, false)));
  return s / kFourPi;
}

}  // namespace reference

}  // namespace skylab
