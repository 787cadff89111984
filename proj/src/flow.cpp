#include "skylab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "skylab/reduce.hpp"
#include "skylab/stencil.hpp"

namespace skylab {

namespace {

constexpr double kFourPi = 4.0 * M_PI;
constexpr double kInf = std::numeric_limits<double>::infinity();

inline Vec3 get3(const std::vector<double>& v, std::size_t p) {
  return {v[3 * p], v[3 * p + 1], v[3 * p + 2]};
}
inline void add3(std::vector<double>& v, std::size_t p, const Vec3& a) {
  v[3 * p] += a.x;
  v[3 * p + 1] += a.y;
  v[3 * p + 2] += a.z;
}
inline void set3(std::vector<double>& v, std::size_t p, const Vec3& a) {
  v[3 * p] = a.x;
  v[3 * p + 1] = a.y;
  v[3 * p + 2] = a.z;
}

// adjoint of the derivative stencil along a line of length n
template <class Get, class Add>
void adjoint_line(int n, double spacing, Get in, Add out) {
  for (int q = 0; q < n; ++q)
    line_derivative_adjoint(in(q), q, n, spacing, [&](int p, const Vec3& v) { out(p, v); });
}

}  // namespace

std::string to_string(FlowStop s) {
  switch (s) {
    case FlowStop::converged: return "converged";
    case FlowStop::max_iters: return "max_iters";
    case FlowStop::energy_diverging: return "energy_diverging";
    case FlowStop::stalled: return "stalled";
  }
  return "?";
}

double flow_energy(const SphereField& f, double r, double h) {
  const int n = f.n();
  const double hs = f.spec().spacing();
  const double cell = hs * hs;
  auto acc = grid_reduce<2>(n, [&](int i, int j, double* out) {
    double w = cell;
    if (i == 0 || i == n - 1) w *= 0.5;
    if (j == 0 || j == n - 1) w *= 0.5;
    const Vec3 g1 = line_derivative([&](int t) { return f.at(t, j); }, i, n, hs);
    const Vec3 g2 = line_derivative([&](int t) { return f.at(i, t); }, j, n, hs);
    const Vec3 nv = f.at(i, j);
    const double omn3 = 1.0 - nv.z;
    out[0] = w * (0.5 * (g1.norm2() + g2.norm2()) + 2.0 * r * (nv.z - 1.0) * (g1.y - g2.x) +
                  0.5 * omn3 * omn3);
    out[1] = w * omn3;
  });
  return acc[0] + h * acc[1];
}

void energy_gradient(const SphereField& f, double r, double h, std::vector<double>& grad) {
  const int n = f.n();
  const std::size_t nodes = static_cast<std::size_t>(n) * n;
  const double hs = f.spec().spacing();
  const double cell = hs * hs;

  grad.assign(3 * nodes, 0.0);
  std::vector<double> a1(3 * nodes), a2(3 * nodes);

  parallel_rows(n, [&](int j) {
    for (int i = 0; i < n; ++i) {
      double w = cell;
      if (i == 0 || i == n - 1) w *= 0.5;
      if (j == 0 || j == n - 1) w *= 0.5;
      const Vec3 g1 = line_derivative([&](int t) { return f.at(t, j); }, i, n, hs);
      const Vec3 g2 = line_derivative([&](int t) { return f.at(i, t); }, j, n, hs);

      const Vec3 nv = f.at(i, j);
      const std::size_t p = static_cast<std::size_t>(j) * n + i;
      const double tr = 2.0 * r * (nv.z - 1.0);
      set3(a1, p, (g1 + Vec3{0.0, tr, 0.0}) * w);
      set3(a2, p, (g2 - Vec3{tr, 0.0, 0.0}) * w);
      set3(grad, p, Vec3{0.0, 0.0, w * (2.0 * r * (g1.y - g2.x) + (nv.z - 1.0) - h)});
    }
  });

  // scatter the adjoint stencils; x1-lines are rows, x2-lines are columns
  parallel_rows(n, [&](int j) {
    const std::size_t row = static_cast<std::size_t>(j) * n;
    adjoint_line(
        n, hs, [&](int q) { return get3(a1, row + q); },
        [&](int p, const Vec3& v) { add3(grad, row + p, v); });
  });
  parallel_rows(n, [&](int i) {
    adjoint_line(
        n, hs, [&](int q) { return get3(a2, static_cast<std::size_t>(q) * n + i); },
        [&](int p, const Vec3& v) { add3(grad, static_cast<std::size_t>(p) * n + i, v); });
  });
}

FlowTrajectory gradient_flow(const SphereField& n0, double r, double h, const FlowParams& p) {
  if (!(p.step_size > 0.0) || !(p.grad_tol > 0.0))
    throw std::invalid_argument("gradient_flow: step_size and grad_tol must be positive");

  FlowTrajectory traj{.energy = {}, .q_raw = {}, .step = {}, .snapshots = {},
                      .reason = FlowStop::max_iters, .iterations = 0, .final_field = n0};
  SphereField cur = n0;
  const int n = cur.n();
  const std::size_t nodes = static_cast<std::size_t>(n) * n;
  const double cell = cur.spec().spacing() * cur.spec().spacing();

  double energy = flow_energy(cur, r, h);
  const double energy_start = energy;
  traj.energy.push_back(energy);
  traj.q_raw.push_back(degree(cur).first);

  std::vector<double> grad;
  std::vector<double> tangent(3 * nodes);
  double eta = p.step_size;
  traj.reason = FlowStop::max_iters;

  for (int iter = 0; iter < p.max_iters; ++iter) {
    energy_gradient(cur, r, h, grad);

    double sup = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double w = cell;
        if (i == 0 || i == n - 1) w *= 0.5;
        if (j == 0 || j == n - 1) w *= 0.5;
        const std::size_t q = static_cast<std::size_t>(j) * n + i;
        const Vec3 nv = cur.at(i, j);
        Vec3 g = get3(grad, q) / w;       // L2 gradient density
        g -= nv * g.dot(nv);              // tangent projection
        set3(tangent, q, g);
        sup = std::max(sup, g.norm());
      }
    if (sup < p.grad_tol) {
      traj.reason = FlowStop::converged;
      break;
    }

    bool accepted = false;
    while (!accepted) {
      SphereField trial = cur;
      const bool renorm = p.renormalize_every <= 1 || (iter % p.renormalize_every) == 0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const std::size_t q = static_cast<std::size_t>(j) * n + i;
          Vec3 v = cur.at(i, j) - get3(tangent, q) * eta;
          trial.set(i, j, renorm ? v.normalized() : v);
        }
      const double trial_energy = flow_energy(trial, r, h);
      if (trial_energy <= energy + 1e-8 * (1.0 + std::abs(energy))) {
        cur = std::move(trial);
        energy = trial_energy;
        accepted = true;
        traj.energy.push_back(energy);
        traj.q_raw.push_back(degree(cur).first);
        traj.step.push_back(eta);
        traj.iterations = iter + 1;
        if (p.snapshot_every > 0 && (traj.iterations % p.snapshot_every) == 0)
          traj.snapshots.push_back(cur);
        // let the backtracking find the stable step scale; growth is undone
        // by a rejection as soon as it overshoots
        eta = std::min(eta * 1.1, 1e6 * p.step_size);
      } else {
        eta *= 0.5;
        if (eta < 1e-12) {
          traj.reason = FlowStop::stalled;
          traj.final_field = cur;
          return traj;
        }
      }
    }
    if (energy < energy_start - 1e3) {
      traj.reason = FlowStop::energy_diverging;
      break;
    }
  }
  traj.final_field = cur;
  return traj;
}

// ---------------------------------------------------------------------------
// stability probes

namespace {

struct BumpIntegrals {
  double D0, M0, L4;  // int |grad phi0|^2, int |phi0|^2, int |phi0|^4
};

const BumpIntegrals& bump_integrals() {
  static const BumpIntegrals b = [] {
    // radial Simpson quadrature of the bump profile on [0, 4]
    const int m = 200001;
    const double dr = 4.0 / (m - 1);
    double d0 = 0, m0 = 0, l4 = 0;
    for (int i = 0; i < m; ++i) {
      const double rho = i * dr;
      const double wt = (i == 0 || i == m - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const double g = perturbation_bump(rho);
      const double u = rho / 4.0;
      const double om = 1.0 - u * u;
      const double dg = (u < 1.0 && om > 0.0) ? -g * u / (2.0 * om * om) : 0.0;
      d0 += wt * dg * dg * rho;
      m0 += wt * g * g * rho;
      l4 += wt * g * g * g * g * rho;
    }
    const double f = 2.0 * M_PI * dr / 3.0;
    return BumpIntegrals{d0 * f, m0 * f, l4 * f};
  }();
  return b;
}

}  // namespace

StabilityReport probe_homogeneous_stability(double r, double h, std::span<const double> lambdas,
                                            std::span<const double> amplitudes, double max_l2,
                                            double max_l4) {
  if (!(r > 0.0)) throw std::invalid_argument("stability probe: r must be positive");
  const BumpIntegrals& bi = bump_integrals();
  StabilityReport report;
  for (double lam : lambdas) {
    const double norm_l2 = lam * std::sqrt(bi.M0);               // ||phi_lambda||_2 / t
    const double norm_l4 = std::sqrt(lam) * std::pow(bi.L4, 0.25);  // ||phi_lambda||_4 / t
    for (double t : amplitudes) {
      double t_used = t;
      if (max_l2 > 0.0) t_used = std::min(t_used, 0.98 * max_l2 / norm_l2);
      if (max_l4 > 0.0) t_used = std::min(t_used, 0.98 * max_l4 / norm_l4);
      if (!(t_used > 0.0)) continue;
      const MapPtr map = perturbed_homogeneous(lam, t_used);
      const SphereField field = sample(*map, map->default_grid());
      const SphereField flat(field.spec());
      const DiffNorms norms = difference_norms(field, flat);
      StabilityProbe probe;
      probe.lambda = lam;
      probe.t = t_used;
      probe.l2 = norms.l2;
      probe.l4 = norms.l4;
      probe.gap = evaluate(field, r, h).E_rh;  // E_{r,h}[e3] = 0
      probe.quad_form = 0.5 * (bi.D0 + h * lam * lam * bi.M0);
      report.probes.push_back(probe);
      if (probe.gap <= 0.0 && !report.witness) {
        report.witness = probe;
        report.all_positive = false;
      }
    }
  }
  report.verdict = report.all_positive ? "stable (all probes positive)"
                                       : "unstable (witness lambda,t attached)";
  return report;
}

// ---------------------------------------------------------------------------
// sweeps

EnergyBreakdown evaluate_family(const AnalyticMap& map, double r, double h) {
  const auto pieces = map.additive_pieces();
  if (pieces.empty()) return evaluate(sample(map, map.default_grid()), r, h);
  EnergyBreakdown total;
  bool first = true;
  for (const auto& [piece, count] : pieces) {
    EnergyBreakdown b = evaluate_family(*piece, r, h);
    auto add = [c = double(count)](double& dst, double src) { dst += c * src; };
    if (first) {
      total = b;
      total.D = total.H_ibp = total.H_direct = total.V = total.Z = total.A = 0.0;
      total.Q_raw = total.residual = 0.0;
      first = false;
    }
    add(total.D, b.D);
    add(total.H_ibp, b.H_ibp);
    add(total.H_direct, b.H_direct);
    add(total.V, b.V);
    add(total.Z, b.Z);
    add(total.A, b.A);
    add(total.Q_raw, b.Q_raw);
    add(total.residual, b.residual);
  }
  total.E_r = total.D + r * total.H_ibp + total.V;
  total.E_rh = total.E_r + h * total.Z;
  total.Q_int = static_cast<int>(std::lround(total.Q_raw));
  total.degree_resolved = std::abs(total.Q_raw - total.Q_int) <= 0.05;
  total.fact_gap_e11 =
      total.E_r - kFourPi * r * r * total.Q_raw - total.residual - (1.0 - r * r) * total.D;
  total.fact_gap = total.fact_gap_e11;
  total.r = r;
  total.h = h;
  return total;
}

std::vector<SweepRow> minimal_energy_sweep(std::span<const double> r_values,
                                           std::span<const int> k_values,
                                           std::span<const double> R_schedule, double lambda_pos) {
  if (r_values.empty() || k_values.empty())
    throw std::invalid_argument("minimal_energy_sweep: empty r or k list");
  if (R_schedule.size() < 2)
    throw std::invalid_argument("minimal_energy_sweep: need at least two gluing radii");

  std::vector<double> Rs(R_schedule.begin(), R_schedule.end());
  std::sort(Rs.begin(), Rs.end());
  const double Rmax = Rs.back();
  const bool want_neg = std::any_of(k_values.begin(), k_values.end(), [](int k) { return k < 0; });
  const bool want_pos = std::any_of(k_values.begin(), k_values.end(), [](int k) { return k > 0; });

  std::vector<SweepRow> rows;
  for (double r : r_values) {
    if (!(r > 0.0)) throw std::invalid_argument("minimal_energy_sweep: r must be positive");

    // Per-vortex energies over the schedule. Negative degrees: cutoff
    // skyrmions, all on one grid sized for the largest R so the quadrature
    // bias cancels in the 1/R^2 Richardson limit. Positive degrees: cutoff
    // anti-skyrmions of core lambda_pos, each on its own grid (their R-tail
    // is negligible; the small core wants the finest spacing available).
    std::vector<double> e_neg, e_pos;
    bool neg_ok = true, pos_ok = true;
    if (want_neg) {
      const GridSpec box = make_grid(Rmax / 2.0 + 1.5, 2049);
      for (double R : Rs) {
        const EnergyBreakdown b = evaluate(sample(*cutoff_skyrmion(r, R), box), r);
        e_neg.push_back(b.E_r);
        neg_ok = neg_ok && b.degree_resolved && b.Q_int == -1;
      }
    }
    if (want_pos) {
      for (double R : Rs) {
        const MapPtr m = cutoff_anti_skyrmion(lambda_pos, R);
        const EnergyBreakdown b = evaluate(sample(*m, make_grid(R / 2.0 + 1.5, 2049)), r);
        e_pos.push_back(b.E_r);
        pos_ok = pos_ok && b.degree_resolved && b.Q_int == 1;
      }
    }

    for (int k : k_values) {
      if (k == 0) {
        rows.push_back({r, 0, kInf, 0.0, 0.0, 0.0, true});
        continue;
      }
      const double theorem =
          (k < 0) ? kFourPi * std::abs(k) * (1.0 - 2.0 * r * r) : kFourPi * k;
      const std::vector<double>& base = (k < 0) ? e_neg : e_pos;
      for (std::size_t s = 0; s < Rs.size(); ++s) {
        const double E = std::abs(k) * base[s];
        rows.push_back({r, k, Rs[s], E, theorem, E - theorem, (k < 0) ? neg_ok : pos_ok});
      }
      double best;
      if (k < 0) {
        // Richardson limit of the C/R^2 cutoff tail through the last two radii
        const double ratio = Rs.back() / Rs[Rs.size() - 2];
        const double e_inf =
            e_neg.back() - (e_neg[Rs.size() - 2] - e_neg.back()) / (ratio * ratio - 1.0);
        best = std::abs(k) * e_inf;
      } else {
        best = k * *std::min_element(e_pos.begin(), e_pos.end());
      }
      rows.push_back({r, k, kInf, best, theorem, best - theorem, (k < 0) ? neg_ok : pos_ok});
    }
  }
  return rows;
}

double stretched_slope_oracle(double r) {
  // int 2 (1 - r^2) / (r^2 x^2 + 1)^2 dx by Simpson plus the analytic tail
  const double X = 400.0 / r;
  const int m = 400001;
  const double dx = 2.0 * X / (m - 1);
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = -X + i * dx;
    const double wt = (i == 0 || i == m - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double d = r * r * x * x + 1.0;
    s += wt * 2.0 * (1.0 - r * r) / (d * d);
  }
  s *= dx / 3.0;
  // tail: int_X^inf ~ 2(1-r^2)/(r^4 x^3 * 3) * 2 sides
  s += 4.0 * (1.0 - r * r) / (3.0 * r * r * r * r * X * X * X);
  return s;
}

SphereField add_tangent_noise(const SphereField& n, double sup_amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  const double S = n.spec().half_width;
  const int N = n.n();

  struct Bump {
    double cx, cy, w;
    Vec3 dir;
  };
  std::vector<Bump> bumps(8);
  for (auto& b : bumps) {
    b.cx = (uniform() - 0.5) * S;
    b.cy = (uniform() - 0.5) * S;
    b.w = S / 20.0 + uniform() * S / 8.0;
    b.dir = Vec3{uniform() - 0.5, uniform() - 0.5, uniform() - 0.5};
  }

  std::vector<double> disp(3 * static_cast<std::size_t>(N) * N, 0.0);
  double sup = 0.0;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const double x = n.spec().coord(i), y = n.spec().coord(j);
      Vec3 d{};
      for (const auto& b : bumps) {
        const double q = ((x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy)) / (2.0 * b.w * b.w);
        d += b.dir * std::exp(-q);
      }
      const Vec3 nv = n.at(i, j);
      d -= nv * d.dot(nv);  // tangent part
      const std::size_t p = static_cast<std::size_t>(j) * N + i;
      set3(disp, p, d);
      sup = std::max(sup, d.norm());
    }
  const double scale = sup > 0.0 ? sup_amplitude / sup : 0.0;

  SphereField out = n;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const std::size_t p = static_cast<std::size_t>(j) * N + i;
      out.set(i, j, (n.at(i, j) + get3(disp, p) * scale).normalized());
    }
  return out;
}

DivergenceResult divergence_sweep(double r, int k, std::span<const double> L_schedule) {
  if (!(r > 1.0)) throw std::invalid_argument("divergence_sweep: requires r > 1");
  if (L_schedule.empty()) throw std::invalid_argument("divergence_sweep: empty L schedule");

  DivergenceResult res;
  res.slope_oracle = stretched_slope_oracle(r);

  const int nv = std::abs(k + 1);
  double vortex_energy = 0.0;
  if (nv > 0) {
    const MapPtr v = (k >= 0) ? cutoff_anti_skyrmion(1.0, 1.0) : cutoff_skyrmion(1.0, 1.0);
    vortex_energy = evaluate(sample(*v, make_grid(1.5, 513)), r).E_r;
  }

  for (double L : L_schedule) {
    // seam rows x2 = +-L/2 must land on grid nodes: S = 1.28 L and
    // N - 1 = 128 q gives h = L / (50 q)
    const int q = std::max(2, static_cast<int>(std::ceil(L / 5.0)));
    const GridSpec grid = make_grid(1.28 * L, 128 * q + 1);
    const EnergyBreakdown b = evaluate(sample(*stretched(r, L, -1), grid), r);
    const double E = b.E_r + nv * vortex_energy;
    const double ref = res.slope_oracle * L;
    res.rows.push_back({r, k, L, E, ref, E - ref, b.degree_resolved});
  }

  // least squares E ~ a L + b over the schedule
  const std::size_t m = res.rows.size();
  double sl = 0, se = 0, sll = 0, sle = 0;
  for (const auto& row : res.rows) {
    sl += row.scale;
    se += row.E;
    sll += row.scale * row.scale;
    sle += row.scale * row.E;
  }
  const double denom = m * sll - sl * sl;
  res.fitted_slope = (denom != 0.0) ? (m * sle - sl * se) / denom : 0.0;
  if (m >= 2) {
    const auto& a = res.rows[m - 2];
    const auto& b2 = res.rows[m - 1];
    res.tail_slope = (b2.E - a.E) / (b2.scale - a.scale);
  }
  res.decreasing = true;
  for (std::size_t s = 1; s < m; ++s)
    res.decreasing = res.decreasing && res.rows[s].E < res.rows[s - 1].E;
  return res;
}

}  // namespace skylab
