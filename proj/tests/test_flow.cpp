#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "skylab/energy.hpp"
#include "skylab/flow.hpp"
#include "skylab/grid.hpp"
#include "skylab/maps.hpp"

using namespace skylab;

namespace {
constexpr double kFourPi = 4.0 * M_PI;
}

TEST_CASE("discrete gradient matches centered differences of the energy") {
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
  CHECK(worst <= 1e-6);
}

TEST_CASE("flow_energy agrees with the breakdown's E_rh") {
  const auto f = sample(*skyrmion(0.6), make_grid(24.0, 129));
  const EnergyBreakdown b = evaluate(f, 0.6, -0.07);
  CHECK(flow_energy(f, 0.6, -0.07) == doctest::Approx(b.E_rh).epsilon(1e-12));
}

TEST_CASE("the homogeneous state is a fixed point: zero iterations") {
  const auto f = sample(*homogeneous(), make_grid(10.0, 65));
  FlowParams p;
  const auto traj = gradient_flow(f, 0.8, 0.3, p);
  CHECK(traj.reason == FlowStop::converged);
  CHECK(traj.iterations == 0);
  CHECK(traj.energy.front() == 0.0);
}

TEST_CASE("perturbed skyrmion flows back to the discrete minimizer (r = 0.5)") {
  const GridSpec g = make_grid(20.0, 257);
  const auto clean = sample(*skyrmion(0.5), g);
  const auto noisy = add_tangent_noise(clean, 1e-2, 3);

  FlowParams p;
  p.max_iters = 250;
  p.step_size = 0.05;
  p.grad_tol = 1e-12;  // effectively run the full budget on both flows
  const auto tc = gradient_flow(clean, 0.5, 0.0, p);
  const auto tn = gradient_flow(noisy, 0.5, 0.0, p);

  // both flows land on the same discrete minimum
  CHECK(std::abs(tn.energy.back() - tc.energy.back()) <= 1e-3);
  // which sits at the continuum value up to quadrature
  CHECK(tn.energy.back() == doctest::Approx(kFourPi * 0.5).epsilon(0.01));
  // the topological sector never changes
  for (double q : tn.q_raw) CHECK(std::abs(q - tn.q_raw.front()) < 0.1);
  CHECK(std::lround(tn.q_raw.back()) == -1);
}

TEST_CASE("descent monotonicity of accepted steps") {
  auto start = add_tangent_noise(sample(*skyrmion(0.5), make_grid(20.0, 129)), 0.05, 17);
  FlowParams p;
  p.max_iters = 80;
  const auto traj = gradient_flow(start, 0.5, 0.0, p);
  REQUIRE(traj.energy.size() >= 2);
  for (std::size_t i = 1; i < traj.energy.size(); ++i)
    CHECK(traj.energy[i] <= traj.energy[i - 1] + 1e-8 * (1.0 + std::abs(traj.energy[i - 1])));
  CHECK(traj.step.size() == traj.energy.size() - 1);
}

TEST_CASE("r > 1: the unit skyrmion is unstable and the flow dives") {
  const auto f = sample(*skyrmion(1.5), make_grid(30.0, 129));
  FlowParams p;
  p.max_iters = 500;
  const auto traj = gradient_flow(f, 1.5, 0.0, p);
  CHECK(traj.energy.back() < traj.energy.front());
  CHECK(traj.iterations <= 500);
}

TEST_CASE("small perturbations of e3 flow back to the homogeneous state") {
  const auto start = sample(*perturbed_homogeneous(1.0, 0.01), make_grid(6.0, 65));
  FlowParams p;
  p.max_iters = 300;
  const auto traj = gradient_flow(start, 0.5, 0.0, p);
  CHECK(traj.energy.front() > 0.0);
  // relaxation toward e3 is algebraic on the plane (no spectral gap), so
  // check a solid fraction of the energy is shed, not an absolute floor
  CHECK(traj.energy.back() < 0.15 * traj.energy.front());
  CHECK(traj.energy.back() < 5e-5);
  CHECK(std::abs(traj.q_raw.back()) < 0.05);
}

TEST_CASE("no minimizer below r = 1: flowing a k = 2 Bogomol'nyi map sheds energy") {
  const auto f = sample(*meromorphic(2, {0.0, 0.1}), make_grid(40.0, 129));
  FlowParams p;
  p.max_iters = 120;
  const auto traj = gradient_flow(f, 0.5, 0.0, p);
  CHECK(traj.energy.back() < traj.energy.front() - 1.0);
}

TEST_CASE("flow bookkeeping") {
  auto start = add_tangent_noise(sample(*skyrmion(0.5), make_grid(20.0, 65)), 0.02, 5);
  FlowParams p;
  p.max_iters = 30;
  p.snapshot_every = 10;
  const auto traj = gradient_flow(start, 0.5, 0.0, p);
  CHECK(traj.energy.size() == static_cast<std::size_t>(traj.iterations) + 1);
  CHECK(traj.q_raw.size() == traj.energy.size());
  CHECK(!traj.snapshots.empty());
  CHECK(traj.final_field.n() == 65);
  CHECK(to_string(traj.reason).size() > 0);
}

TEST_CASE("homogeneous stability probes") {
  const double lams[] = {1.0, 2.0, 4.0, 20.0};
  const double ts[] = {1e-3, 1e-2};

  SUBCASE("critical coupling h = 0, L2 ball") {
    const auto rep = probe_homogeneous_stability(0.8, 0.0, lams, ts, 0.1, 0.0);
    CHECK(rep.all_positive);
    CHECK(rep.verdict == "stable (all probes positive)");
    for (const auto& probe : rep.probes) {
      CHECK(probe.l2 <= 0.1 * 1.001);
      CHECK(probe.gap > 0.0);
    }
  }
  SUBCASE("supercritical h > 0, L4 ball") {
    const auto rep = probe_homogeneous_stability(0.8, 0.2, lams, ts, 0.0, 0.5);
    CHECK(rep.all_positive);
    for (const auto& probe : rep.probes) CHECK(probe.l4 <= 0.5 * 1.001);
  }
  SUBCASE("subcritical h < 0 has a negative-gap witness") {
    const auto rep = probe_homogeneous_stability(0.8, -0.1, lams, ts, 0.0, 0.0);
    CHECK_FALSE(rep.all_positive);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->gap < 0.0);
    CHECK(rep.verdict == "unstable (witness lambda,t attached)");
    // the quadratic form flips sign between lambda = 1 and lambda = 20
    double q1 = 0, q20 = 0;
    for (const auto& probe : rep.probes) {
      if (probe.lambda == 1.0) q1 = probe.quad_form;
      if (probe.lambda == 20.0) q20 = probe.quad_form;
    }
    CHECK(q1 > 0.0);
    CHECK(q20 < 0.0);
  }
  SUBCASE("E_{r,h}[n_t] tracks t^2 times the quadratic form past the flip") {
    const auto rep = probe_homogeneous_stability(0.8, -0.1, lams, ts, 0.0, 0.0);
    for (const auto& probe : rep.probes)
      if (probe.lambda == 20.0 && probe.t == 1e-2) {
        CHECK(probe.gap < 0.0);
        CHECK(probe.gap ==
              doctest::Approx(probe.t * probe.t * probe.quad_form).epsilon(0.05));
      }
  }
}

TEST_CASE("minimal-energy sweep (single r spot checks)") {
  const double rs[] = {0.5};
  const int ks[] = {-1, 0, 1};
  const double Rs[] = {8.0, 16.0, 32.0};
  const auto rows = minimal_energy_sweep(rs, ks, Rs, 0.05);
  for (const auto& row : rows) {
    if (!std::isinf(row.scale)) continue;
    if (row.k == -1) CHECK(row.E == doctest::Approx(2.0 * M_PI).epsilon(0.01));
    if (row.k == 0) CHECK(row.E == 0.0);
    if (row.k == 1) CHECK(row.E == doctest::Approx(kFourPi).epsilon(0.02));
    CHECK(row.resolved);
  }
  CHECK_THROWS_AS(minimal_energy_sweep({}, ks, Rs, 0.05), std::invalid_argument);
  const double one_R[] = {8.0};
  CHECK_THROWS_AS(minimal_energy_sweep(rs, ks, one_R, 0.05), std::invalid_argument);
}

TEST_CASE("divergence sweep at r = 1.25") {
  const double Ls[] = {10.0, 20.0, 40.0};
  const auto res = divergence_sweep(1.25, -1, Ls);
  CHECK(res.decreasing);
  CHECK(res.rows.back().E < 0.0);
  CHECK(res.fitted_slope < 0.0);
  // oracle: quadrature of the 1D integrand equals pi (1 - r^2) / r
  CHECK(res.slope_oracle == doctest::Approx(M_PI * (1.0 - 1.25 * 1.25) / 1.25).epsilon(1e-6));
  CHECK(res.tail_slope == doctest::Approx(res.slope_oracle).epsilon(0.10));
  CHECK_THROWS_AS(divergence_sweep(0.9, -1, Ls), std::invalid_argument);
}

TEST_CASE("k = 0 divergence run uses anti-vortex caps and still diverges") {
  const double Ls[] = {10.0, 20.0};
  const auto res = divergence_sweep(1.25, 0, Ls);
  CHECK(res.decreasing);
  const auto b = evaluate_family(*stretched(1.25, 10.0, 0), 1.25);
  CHECK(b.Q_int == 0);
}

TEST_CASE("glued families evaluate additively") {
  // multi_vortex energy = |k| times the single-ball energy, exactly
  const auto single = evaluate_family(*cutoff_skyrmion(0.5, 8.0), 0.5);
  const auto pair = evaluate_family(*multi_vortex(0.5, 8.0, -2), 0.5);
  CHECK(pair.E_r == doctest::Approx(2.0 * single.E_r).epsilon(1e-12));
  CHECK(pair.Q_raw == doctest::Approx(2.0 * single.Q_raw).epsilon(1e-12));
}
