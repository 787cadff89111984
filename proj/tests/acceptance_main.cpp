// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Desk scale throughout: N = 513 family defaults, tail policy and gluing
// schedules as documented in the README.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "skylab/energy.hpp"
#include "skylab/flow.hpp"
#include "skylab/grid.hpp"
#include "skylab/maps.hpp"
#include "skylab/moduli.hpp"
#include "skylab/reduce.hpp"

using namespace skylab;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, format);
  std::vsnprintf(buf, sizeof buf, format, ap);
  va_end(ap);
  return buf;
}

constexpr double kFourPi = 4.0 * M_PI;

struct FamilyInstance {
  MapPtr map;
  double r;
  const char* name;
};

// The ten built-in families at their canonical parameters.
std::vector<FamilyInstance> builtin_families() {
  return {
      {homogeneous(), 0.7, "homogeneous"},
      {skyrmion(0.5), 0.5, "skyrmion"},
      {anti_skyrmion(0.5), 0.5, "anti_skyrmion"},
      {cutoff_skyrmion(1.0, 16.0), 1.0, "cutoff"},
      {multi_vortex(0.5, 8.0, -2), 0.5, "multi_vortex"},
      {stretched(1.25, 10.0, -1), 1.25, "stretched"},
      {equivariant([](double rho) { return skyrmion_theta(rho, 0.5); }, 1, M_PI / 2.0, 20.0),
       0.5, "equivariant"},
      {distorted(Complex(0.25, 0.0)), 1.0, "distorted"},
      {meromorphic(2, Complex(0.0, 0.1)), 1.0, "meromorphic"},
      {perturbed_homogeneous(4.0, 0.01), 0.8, "perturbed"},
  };
}

// ---------------------------------------------------------------------- 1
void criterion_minimal_energy_table() {
  const double rs[] = {0.25, 0.5, 1.0 / std::sqrt(2.0), 0.9};
  const int ks[] = {-3, -2, -1, 0, 1, 2, 3};
  const double Rs[] = {8.0, 16.0, 32.0};
  const auto rows = minimal_energy_sweep(rs, ks, Rs, 0.05);
  bool pass = true;
  double worst = 0.0;
  std::string worst_at;
  for (const auto& row : rows) {
    if (!std::isinf(row.scale)) continue;  // judge the best-achieved rows
    const double tol = 0.02 * kFourPi * std::max(1, std::abs(row.k));
    const double gap = std::abs(row.gap);
    if (gap / tol > worst) {
      worst = gap / tol;
      worst_at = fmt("(r=%.4g,k=%d)", row.r, row.k);
    }
    if (gap > tol || !row.resolved) pass = false;
  }
  report(1, pass, fmt("minimal-energy table: worst |gap|/tol = %.3f at %s", worst,
                      worst_at.c_str()));
}

// ---------------------------------------------------------------------- 2
void criterion_skyrmion_exactness() {
  bool pass = true;
  std::string detail = "skyrmion:";
  for (double r : {0.25, 0.5, 0.75, 1.0}) {
    const auto tc = evaluate_with_tail(*skyrmion(r), r);
    const double exact = kFourPi * (1.0 - 2.0 * r * r);
    const bool e_ok = std::abs(tc.E_r - exact) <= 0.01 * std::abs(exact);
    const bool d_ok = std::abs(tc.D - kFourPi) <= 0.005 * kFourPi;
    if (!(e_ok && d_ok)) pass = false;
    detail += fmt(" r=%.2f dE=%.0e dD=%.0e;", r, std::abs(tc.E_r - exact),
                  std::abs(tc.D - kFourPi));
  }
  double prev = -1.0;
  for (int n : {257, 513, 1025}) {
    const double res = bogomolnyi_residual(sample(*skyrmion(0.5), make_grid(20.0, n)), 0.5);
    if (prev > 0.0) {
      if (!(prev / res >= 3.5)) pass = false;
      detail += fmt(" res-ratio=%.0f;", prev / res);
    }
    prev = res;
  }
  report(2, pass, detail);
}

// ---------------------------------------------------------------------- 3
void criterion_factorization_identity(const std::vector<FamilyInstance>& fams) {
  bool pass = true;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& fm : fams) {
    const EnergyBreakdown b = evaluate_family(*fm.map, fm.r);
    const double ratio = std::abs(b.fact_gap_e11) / (1e-2 * (1.0 + std::abs(b.E_r)));
    if (ratio > worst) {
      worst = ratio;
      worst_name = fm.name;
    }
    if (ratio > 1.0) pass = false;
  }
  // refinement improves the identity; the defect is truncation-dominated for
  // non-compact families, so refine by doubling the window at fixed spacing
  const double g1 =
      std::abs(evaluate(sample(*skyrmion(1.0), make_grid(40.0, 513)), 1.0).fact_gap_e11);
  const double g2 =
      std::abs(evaluate(sample(*skyrmion(1.0), make_grid(80.0, 1025)), 1.0).fact_gap_e11);
  if (!(g2 < g1)) pass = false;
  report(3, pass,
         fmt("factorization identity: worst |gap|/tol = %.3f (%s); refinement %.1e -> %.1e",
             worst, worst_name.c_str(), g1, g2));
}

// ---------------------------------------------------------------------- 4
void criterion_l9_identity() {
  bool pass = true;
  std::string detail = "helical identity:";
  for (double r : {0.5, 1.0}) {
    const auto m = skyrmion(r);
    const EnergyBreakdown b = evaluate(sample(*m, m->default_grid()), r);
    const double gap = std::abs(b.D - kFourPi * b.Q_raw - b.V / (r * r));
    const double tol = 2e-2 * (1.0 + b.D);
    if (gap > tol) pass = false;
    detail += fmt(" sky(r=%.1f) %.0e/%.0e;", r, gap, tol);
  }
  const auto m = meromorphic(2, Complex(0.0, 0.1));
  const EnergyBreakdown b = evaluate(sample(*m, m->default_grid()), 1.0);
  const double gap = std::abs(b.D - kFourPi * b.Q_raw - b.V);
  const double tol = 2e-2 * (1.0 + b.D);
  if (gap > tol) pass = false;
  detail += fmt(" mero(k=2) %.0e/%.0e", gap, tol);
  report(4, pass, detail);
}

// ---------------------------------------------------------------------- 5
void criterion_degree_quantization(const std::vector<FamilyInstance>& fams) {
  bool pass = true;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& fm : fams) {
    const EnergyBreakdown b = evaluate_family(*fm.map, fm.r);
    const double err = std::abs(b.Q_raw - b.Q_int);
    if (err > worst) {
      worst = err;
      worst_name = fm.name;
    }
    if (err >= 0.02) pass = false;
  }
  const auto qa = evaluate_family(*distorted(Complex(0.25, 0.0)), 1.0);
  const auto qb = evaluate_family(*distorted(Complex(0.75, 0.0)), 1.0);
  if (!(qa.Q_int == -1 && qb.Q_int == 1)) pass = false;
  report(5, pass,
         fmt("degree quantization: worst |Q_raw-Q_int| = %.4f (%s); distorted flip %d -> %d",
             worst, worst_name.c_str(), qa.Q_int, qb.Q_int));
}

// ---------------------------------------------------------------------- 6
void criterion_divergence() {
  const double Ls[] = {10.0, 20.0, 40.0, 80.0};
  const auto res = divergence_sweep(1.25, -1, Ls);
  const bool ends_negative = res.rows.back().E < 0.0;
  const double slope_err =
      std::abs(res.tail_slope - res.slope_oracle) / std::abs(res.slope_oracle);
  const bool pass = res.decreasing && ends_negative && slope_err <= 0.10;
  report(6, pass,
         fmt("divergence r=1.25: decreasing=%d final E=%.2f slope=%.4f vs oracle %.4f (err %.1f%%)",
             res.decreasing, res.rows.back().E, res.tail_slope, res.slope_oracle,
             100.0 * slope_err));
}

// ---------------------------------------------------------------------- 7
void criterion_stability_transitions() {
  const double lams[] = {1.0, 2.0, 4.0, 8.0, 16.0, 20.0, 32.0};
  const double ts[] = {1e-3, 1e-2};
  bool pass = true;
  std::string detail = "stability:";

  for (double r : {0.5, 1.5}) {
    const auto rep = probe_homogeneous_stability(r, 0.0, lams, ts, 0.1, 0.0);
    if (!rep.all_positive) pass = false;
    detail += fmt(" (a) r=%.1f %s;", r, rep.all_positive ? "+" : "NEGATIVE");
  }
  {
    const auto rep = probe_homogeneous_stability(0.8, 0.2, lams, ts, 0.0, 0.5);
    if (!rep.all_positive) pass = false;
    detail += fmt(" (b) h=0.2 %s;", rep.all_positive ? "+" : "NEGATIVE");
  }
  {
    const auto rep = probe_homogeneous_stability(0.8, -0.1, lams, ts, 0.0, 0.0);
    bool lam20_negative = false;
    for (const auto& p : rep.probes)
      if (p.lambda == 20.0 && p.t == 1e-2 && p.gap < 0.0) lam20_negative = true;
    if (!rep.witness || !lam20_negative) pass = false;
    if (rep.witness)
      detail += fmt(" (c) witness lam=%g t=%g gap=%.1e;", rep.witness->lambda, rep.witness->t,
                    rep.witness->gap);
  }
  {
    const auto m = skyrmion(1.5);
    FlowParams p;
    p.max_iters = 500;
    const auto traj = gradient_flow(sample(*m, m->default_grid()), 1.5, 0.0, p);
    const bool descended = traj.energy.back() < traj.energy.front() && traj.iterations <= 500;
    if (!descended) pass = false;
    detail += fmt(" (d) flow E %.2f -> %.2f in %d iters", traj.energy.front(),
                  traj.energy.back(), traj.iterations);
  }
  report(7, pass, detail);
}

// ---------------------------------------------------------------------- 8
void criterion_moduli_thresholds() {
  bool pass = true;
  std::string detail;
  const std::pair<int, double> exact[] = {{2, 1.0 / 16.0},
                                          {5, 8.0 / 3125.0},
                                          {-2, 16.0 / 27.0},
                                          {-3, 27.0 / 32.0},
                                          {-5, 3125.0 / 1458.0}};
  bool thresholds_exact = true;
  for (const auto& [k, value] : exact)
    if (threshold_a_star(k) != value) thresholds_exact = false;
  if (!thresholds_exact) pass = false;
  detail += fmt("a* exact=%d;", thresholds_exact);
  for (int k : {2, 5, -2, -3, -5}) {
    const double a_star = threshold_a_star(k);
    const double schedule[] = {0.5 * a_star, 2.0 * a_star};
    const auto rows = bifurcation_scan(k, schedule, 640);
    const int want_lo = k >= 2 ? k + 2 : 2;
    const int want_hi = k >= 2 ? 1 : -k - 1;
    const bool ok = rows[0].components == want_lo && rows[1].components == want_hi &&
                    rows[0].resolved && rows[1].resolved && (k >= 2 || rows[0].nested) &&
                    (k >= 2 || !rows[1].nested);
    if (!ok) pass = false;
    detail += fmt(" k=%d: %d/%d want %d/%d%s;", k, rows[0].components, rows[1].components,
                  want_lo, want_hi, ok ? "" : " BAD");
  }
  report(8, pass, detail);
}

// ---------------------------------------------------------------------- 9
void criterion_brs_correction() {
  const double radii[] = {50.0, 100.0, 200.0};
  const double scale = 8.0 * M_PI;
  const auto b1 = brs_energy(*meromorphic(2, Complex(0.0, 0.1)), radii);
  const auto b2 = brs_energy(*meromorphic(-2, Complex(0.0, 8.0 / 27.0)), radii);
  const bool pass = std::abs(b1.correction) <= 0.01 * scale &&
                    std::abs(b2.correction - scale) <= 0.01 * scale && b1.converged &&
                    b2.converged;
  report(9, pass,
         fmt("BRS correction at R=200: k=2 -> %.2e (want 0), k=-2 -> %.6f (want %.6f)",
             b1.correction, b2.correction, scale));
}

// --------------------------------------------------------------------- 10
void criterion_property_suites() {
  bool pass = true;
  std::string detail;

  {  // pointwise identities at machine precision
    const auto f = sample(*skyrmion(0.7), make_grid(28.0, 257));
    double worst_ptwise = 0.0, worst_vza = 0.0;
    for (int j = 0; j < f.n(); ++j)
      for (int i = 0; i < f.n(); ++i) {
        const Vec3 nv = f.at(i, j);
        worst_ptwise = std::max(worst_ptwise,
                                std::abs(2.0 * (1.0 - nv.z) - (nv - e3).norm2()));
        const double v = 0.5 * (1.0 - nv.z) * (1.0 - nv.z);
        const double za = (1.0 - nv.z) - 0.5 * (1.0 - nv.z * nv.z);
        worst_vza = std::max(worst_vza, std::abs(v - za));
      }
    const EnergyBreakdown b = evaluate(f, 0.7);
    const double vza_quad = std::abs(b.V - (b.Z - b.A));
    if (worst_ptwise > 1e-13 || worst_vza > 1e-13 || vza_quad > 1e-10 * (1.0 + b.Z))
      pass = false;
    detail += fmt("ptwise %.0e V-(Z-A) %.0e;", std::max(worst_ptwise, worst_vza), vza_quad);
  }

  {  // descent monotonicity of accepted steps
    auto start = add_tangent_noise(sample(*skyrmion(0.5), make_grid(20.0, 129)), 0.05, 11);
    FlowParams p;
    p.max_iters = 60;
    const auto traj = gradient_flow(start, 0.5, 0.0, p);
    bool monotone = true;
    for (std::size_t i = 1; i < traj.energy.size(); ++i)
      monotone = monotone && traj.energy[i] <=
                                 traj.energy[i - 1] + 1e-8 * (1.0 + std::abs(traj.energy[i - 1]));
    if (!monotone) pass = false;
    detail += fmt(" descent=%d;", monotone);
  }

  {  // finite-difference gradient check at 20 random nodes, relative 1e-6
    auto f = add_tangent_noise(sample(*skyrmion(0.7), make_grid(10.0, 65)), 0.05, 42);
    std::vector<double> g;
    energy_gradient(f, 0.8, -0.05, g);
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int probe = 0; probe < 20; ++probe) {
      const int i = 2 + static_cast<int>(rng() % 61), j = 2 + static_cast<int>(rng() % 61);
      const Vec3 nv = f.at(i, j);
      const Vec3 t1 = nv.cross(std::abs(nv.z) < 0.9 ? e3 : e1).normalized();
      for (const Vec3& tau : {t1, nv.cross(t1).normalized()}) {
        const double eps = 1e-5;
        SphereField fp = f, fm = f;
        fp.set(i, j, nv + tau * eps);
        fm.set(i, j, nv - tau * eps);
        const double fd = (flow_energy(fp, 0.8, -0.05) - flow_energy(fm, 0.8, -0.05)) / (2 * eps);
        const std::size_t p = static_cast<std::size_t>(j) * f.n() + i;
        const double an = Vec3{g[3 * p], g[3 * p + 1], g[3 * p + 2]}.dot(tau);
        worst = std::max(worst, std::abs(fd - an) / (1.0 + std::abs(an)));
      }
    }
    if (worst > 1e-6) pass = false;
    detail += fmt(" grad-fd %.0e;", worst);
  }

  {  // chart overlap at 1e-12
    std::mt19937_64 rng(123);
    auto uniform = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      const double mag = std::pow(10.0, -3.0 + 6.0 * uniform());
      const Complex v = std::polar(mag, 2.0 * M_PI * uniform());
      worst = std::max(worst,
                       (north_chart_to_sphere(v) - south_chart_to_sphere(1.0 / v)).norm());
    }
    if (worst > 1e-12) pass = false;
    detail += fmt(" charts %.0e;", worst);
  }

  {  // discrete symmetry invariance of (E_r, Q) at relative 1e-6
    const auto m = cutoff_skyrmion(0.8, 10.0);
    const GridSpec g = make_grid(12.0, 257);
    const SphereField f = sample(*m, g);
    const EnergyBreakdown b0 = evaluate(f, 0.8);

    SphereField ft(g);  // translate by two grid cells (support margin keeps it exact)
    const double shift = 2.0 * g.spacing();
    for (int j = 0; j < g.samples; ++j)
      for (int i = 0; i < g.samples; ++i)
        ft.set(i, j, m->value(g.coord(i) - shift, g.coord(j)));
    const EnergyBreakdown bt = evaluate(ft, 0.8);

    SphereField fr(g);  // rotate domain by pi/2, codomain horizontally by pi/2
    for (int j = 0; j < g.samples; ++j)
      for (int i = 0; i < g.samples; ++i) {
        const Vec3 v = f.at(j, g.samples - 1 - i);  // value at R^{-1} x
        fr.set(i, j, Vec3{-v.y, v.x, v.z});
      }
    const EnergyBreakdown br = evaluate(fr, 0.8);

    const double te = std::abs(bt.E_r - b0.E_r) / (1.0 + std::abs(b0.E_r));
    const double tq = std::abs(bt.Q_raw - b0.Q_raw);
    const double re = std::abs(br.E_r - b0.E_r) / (1.0 + std::abs(b0.E_r));
    const double rq = std::abs(br.Q_raw - b0.Q_raw);
    if (te > 1e-6 || tq > 1e-6 || re > 1e-6 || rq > 1e-6) pass = false;
    detail += fmt(" invariance %.0e", std::max({te, tq, re, rq}));
  }

  report(10, pass, detail);
}

}  // namespace

int main() {
  const auto fams = builtin_families();
  criterion_minimal_energy_table();
  criterion_skyrmion_exactness();
  criterion_factorization_identity(fams);
  criterion_l9_identity();
  criterion_degree_quantization(fams);
  criterion_divergence();
  criterion_stability_transitions();
  criterion_moduli_thresholds();
  criterion_brs_correction();
  criterion_property_suites();
  if (g_failures)
    std::printf("%d criterion(s) FAILED\n", g_failures);
  else
    std::printf("all acceptance criteria passed\n");
  return g_failures == 0 ? 0 : 1;
}
