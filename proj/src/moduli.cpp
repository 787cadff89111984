#include "skylab/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "skylab/maps.hpp"

namespace skylab {

namespace {
constexpr double kBig = 1e12;

double integer_power(double base, int exp) {
  double out = 1.0;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}
}  // namespace

double v_abs2(const MeromorphicParams& p, double x, double y) {
  const double r = std::hypot(x, y);
  if (r == 0.0) {
    if (p.k >= 2) return 0.0;
    if (p.k == 0) return std::norm(p.a);
    return kBig;  // pole of f: the northpole, |v| = infinity
  }
  const double th = std::atan2(y, x);
  const double aa = std::abs(p.a);
  const double val = 0.25 * r * r + aa * aa * std::pow(r, 2.0 * p.k) -
                     aa * std::pow(r, p.k + 1.0) *
                         std::sin((p.k + 1.0) * th + std::arg(p.a));
  if (!std::isfinite(val) || val > kBig) return kBig;
  return val;
}

Z0Set z0_points(const MeromorphicParams& p) {
  const int k = p.k;
  const Complex a = p.a;
  Z0Set out;

  if (k == -1) {
    // v = 0 iff 2a = i |z|^2: a circle when a is positive imaginary, else empty
    if (std::abs(a.real()) < 1e-12 * std::max(1.0, std::abs(a)) && a.imag() > 0.0)
      out.circle_radius2 = 2.0 * a.imag();
    return out;
  }
  if (k == 1) {
    out.points.push_back({0.0, 0.0});  // the linear system X^a x = 0
    return out;
  }
  if (k == 0) {
    out.points.push_back(Complex{2.0 * a.imag(), 2.0 * a.real()});
  } else {
    if (k >= 2) out.points.push_back({0.0, 0.0});
    const double radius = std::pow(2.0 * std::abs(a), -1.0 / (k - 1.0));
    const double phase0 = (M_PI / 2.0 - std::arg(a)) / (k + 1.0);
    const int count = (k >= 2) ? k + 1 : -k - 1;
    for (int j = 0; j < count; ++j) {
      const double phi = phase0 + 2.0 * M_PI * j / (k + 1.0);
      out.points.push_back(std::polar(radius, phi));
    }
  }

  // Newton refinement on v as a map R^2 -> R^2; the analytic points must
  // reproduce themselves to high accuracy.
  for (Complex& z : out.points) {
    Complex zz = z;
    for (int it = 0; it < 40; ++it) {
      const Complex v = meromorphic_v(k, a, zz);
      if (std::abs(v) < 1e-13) break;
      Complex vz = (k == 0 || zz == Complex{}) ? Complex{} : a * double(k) * std::pow(zz, k - 1);
      const Complex vzb{0.0, -0.5};
      const double j11 = (vz + vzb).real(), j21 = (vz + vzb).imag();
      const double j12 = (Complex(0, 1) * (vz - vzb)).real();
      const double j22 = (Complex(0, 1) * (vz - vzb)).imag();
      const double det = j11 * j22 - j12 * j21;
      if (det == 0.0) break;
      zz -= Complex{(v.real() * j22 - v.imag() * j12) / det,
                    (j11 * v.imag() - j21 * v.real()) / det};
    }
    if (std::abs(meromorphic_v(k, a, zz)) > 1e-8)
      throw std::runtime_error("z0_points: refinement did not confirm an analytic zero");
    z = zz;
  }
  return out;
}

double threshold_a_star(int k) {
  if (std::abs(k) < 2) throw std::domain_error("threshold_a_star: requires |k| >= 2");
  if (std::abs(k) > 11) throw std::domain_error("threshold_a_star: |k| too large for exact evaluation");
  if (k >= 2) {
    // (k-1)^(k-1) / (2k)^k, both factors exact in double for |k| <= 11
    return integer_power(k - 1.0, k - 1) / integer_power(2.0 * k, k);
  }
  const int m = -k;  // (2m)^m / (m+1)^(m+1)
  return integer_power(2.0 * m, m) / integer_power(m + 1.0, m + 1);
}

// ---------------------------------------------------------------------------
// marching squares over F = |v|^2 - 1

namespace {

struct Segment {
  std::int64_t e0, e1;  // lattice-edge keys of the two endpoints
};

struct Extractor {
  const MeromorphicParams& p;
  double W;
  int cells;
  double h;
  std::vector<double> F;  // (cells+1)^2 lattice
  std::map<std::int64_t, std::array<double, 2>> edge_point;
  std::vector<Segment> segments;

  Extractor(const MeromorphicParams& p_, double W_, int cells_)
      : p(p_), W(W_), cells(cells_), h(2.0 * W_ / cells_) {
    const int n = cells + 1;
    F.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) F[idx(i, j)] = v_abs2(p, x(i), y(j)) - 1.0;
  }

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * (cells + 1) + i; }
  double x(int i) const { return -W + i * h; }
  double y(int j) const { return -W + j * h; }

  std::int64_t hkey(int i, int j) const { return (static_cast<std::int64_t>(j) * (cells + 1) + i) * 2; }
  std::int64_t vkey(int i, int j) const { return (static_cast<std::int64_t>(j) * (cells + 1) + i) * 2 + 1; }

  std::array<double, 2> cross_h(int i, int j) {
    const double f0 = F[idx(i, j)], f1 = F[idx(i + 1, j)];
    const double t = f0 / (f0 - f1);
    return {x(i) + t * h, y(j)};
  }
  std::array<double, 2> cross_v(int i, int j) {
    const double f0 = F[idx(i, j)], f1 = F[idx(i, j + 1)];
    const double t = f0 / (f0 - f1);
    return {x(i), y(j) + t * h};
  }

  void run() {
    for (int j = 0; j < cells; ++j)
      for (int i = 0; i < cells; ++i) {
        const bool b00 = F[idx(i, j)] < 0.0;
        const bool b10 = F[idx(i + 1, j)] < 0.0;
        const bool b11 = F[idx(i + 1, j + 1)] < 0.0;
        const bool b01 = F[idx(i, j + 1)] < 0.0;
        const int code = (b00 ? 1 : 0) | (b10 ? 2 : 0) | (b11 ? 4 : 0) | (b01 ? 8 : 0);
        if (code == 0 || code == 15) continue;

        std::vector<std::int64_t> keys;
        if (b00 != b10) { edge_point[hkey(i, j)] = cross_h(i, j); keys.push_back(hkey(i, j)); }
        if (b10 != b11) { edge_point[vkey(i + 1, j)] = cross_v(i + 1, j); keys.push_back(vkey(i + 1, j)); }
        if (b01 != b11) { edge_point[hkey(i, j + 1)] = cross_h(i, j + 1); keys.push_back(hkey(i, j + 1)); }
        if (b00 != b01) { edge_point[vkey(i, j)] = cross_v(i, j); keys.push_back(vkey(i, j)); }

        if (keys.size() == 2) {
          segments.push_back({keys[0], keys[1]});
        } else if (keys.size() == 4) {
          // saddle: pair by the sign of the cell center
          const double fc = 0.25 * (F[idx(i, j)] + F[idx(i + 1, j)] + F[idx(i + 1, j + 1)] +
                                    F[idx(i, j + 1)]);
          // keys order: bottom, right, top, left
          const bool pair_bottom_right = (b00 && b11 && fc < 0.0) || (!b00 && !b11 && fc >= 0.0);
          if (pair_bottom_right) {
            segments.push_back({keys[0], keys[1]});
            segments.push_back({keys[2], keys[3]});
          } else {
            segments.push_back({keys[0], keys[3]});
            segments.push_back({keys[1], keys[2]});
          }
        }
      }
  }
};

}  // namespace

Z1Extraction z1_extract(const MeromorphicParams& p, ModuliWindow window) {
  const bool auto_window = !(window.radius > 0.0);
  double W = window.radius;
  if (auto_window) {
    double z0_radius = 0.0;
    const Z0Set z0 = z0_points(p);
    for (const Complex& z : z0.points) z0_radius = std::max(z0_radius, std::abs(z));
    if (z0.circle_radius2) z0_radius = std::max(z0_radius, std::sqrt(*z0.circle_radius2));
    const double heuristic =
        (p.k == 1) ? 2.0 : std::pow(4.0 * std::abs(p.a), 1.0 / (1.0 - p.k));
    W = 2.0 * std::max({z0_radius, 2.0, heuristic});
  }

  Z1Extraction out;
  for (int attempt = 0;; ++attempt) {
    Extractor ex(p, W, window.cells);
    ex.run();

    // chain segments through shared lattice edges
    std::map<std::int64_t, std::vector<int>> by_edge;
    for (int s = 0; s < static_cast<int>(ex.segments.size()); ++s) {
      by_edge[ex.segments[s].e0].push_back(s);
      by_edge[ex.segments[s].e1].push_back(s);
    }
    std::vector<bool> used(ex.segments.size(), false);
    std::vector<LevelSetCurve> curves;
    for (int s0 = 0; s0 < static_cast<int>(ex.segments.size()); ++s0) {
      if (used[s0]) continue;
      std::vector<std::int64_t> chain{ex.segments[s0].e0, ex.segments[s0].e1};
      used[s0] = true;
      bool closed = false;
      for (int dir = 0; dir < 2; ++dir) {
        while (true) {
          const std::int64_t tip = dir == 0 ? chain.back() : chain.front();
          int next = -1;
          for (int s : by_edge[tip])
            if (!used[s]) { next = s; break; }
          if (next < 0) break;
          used[next] = true;
          const std::int64_t other =
              ex.segments[next].e0 == tip ? ex.segments[next].e1 : ex.segments[next].e0;
          if (dir == 0) chain.push_back(other);
          else chain.insert(chain.begin(), other);
          if (chain.front() == chain.back()) { closed = true; break; }
        }
        if (closed) break;
      }
      LevelSetCurve c;
      c.closed = closed;
      for (std::int64_t key : chain) c.pts.push_back(ex.edge_point.at(key));
      curves.push_back(std::move(c));
    }

    // join open chains whose endpoints nearly touch (saddle fallout)
    const double join_tol = 1.5 * ex.h;
    bool merged = true;
    while (merged) {
      merged = false;
      for (std::size_t a = 0; a < curves.size() && !merged; ++a) {
        if (curves[a].closed) continue;
        for (std::size_t b = 0; b < curves.size() && !merged; ++b) {
          if (a == b || curves[b].closed) continue;
          auto d2 = [](const std::array<double, 2>& u, const std::array<double, 2>& v) {
            return std::hypot(u[0] - v[0], u[1] - v[1]);
          };
          auto& pa = curves[a].pts;
          auto& pb = curves[b].pts;
          if (d2(pa.back(), pb.front()) <= join_tol) {
            pa.insert(pa.end(), pb.begin(), pb.end());
          } else if (d2(pa.back(), pb.back()) <= join_tol) {
            pa.insert(pa.end(), pb.rbegin(), pb.rend());
          } else if (d2(pa.front(), pb.back()) <= join_tol) {
            pa.insert(pa.begin(), pb.begin(), pb.end());
          } else if (d2(pa.front(), pb.front()) <= join_tol) {
            pa.insert(pa.begin(), pb.rbegin(), pb.rend());
          } else {
            continue;
          }
          curves.erase(curves.begin() + b);
          merged = true;
        }
      }
    }
    for (auto& c : curves) {
      if (!c.closed && c.pts.size() > 2 &&
          std::hypot(c.pts.front()[0] - c.pts.back()[0], c.pts.front()[1] - c.pts.back()[1]) <=
              join_tol) {
        c.closed = true;
        c.pts.push_back(c.pts.front());
      }
      if (c.closed && c.pts.front() != c.pts.back()) c.pts.push_back(c.pts.front());
    }

    int open_at_boundary = 0;
    for (const auto& c : curves)
      if (!c.closed) {
        auto near_boundary = [&](const std::array<double, 2>& q) {
          return std::max(std::abs(q[0]), std::abs(q[1])) >= W - 1.5 * ex.h;
        };
        if (near_boundary(c.pts.front()) || near_boundary(c.pts.back())) ++open_at_boundary;
      }

    if (open_at_boundary > 0 && auto_window && attempt < 4) {
      W *= 2.0;
      out.window_grew = true;
      continue;
    }

    int id = 0;
    for (auto& c : curves) c.component_id = id++;
    out.curves = std::move(curves);
    out.window_radius = W;
    out.open_components = open_at_boundary;
    break;
  }

  // enclosure bookkeeping against the analytic Z0 points
  const Z0Set z0 = z0_points(p);
  for (auto& c : out.curves) {
    if (!c.closed) continue;
    for (std::size_t q = 0; q < z0.points.size(); ++q) {
      const double px = z0.points[q].real(), py = z0.points[q].imag();
      bool inside = false;
      for (std::size_t u = 0, v = c.pts.size() - 1; u < c.pts.size(); v = u++) {
        if ((c.pts[u][1] > py) != (c.pts[v][1] > py) &&
            px < (c.pts[v][0] - c.pts[u][0]) * (py - c.pts[u][1]) /
                     (c.pts[v][1] - c.pts[u][1]) +
                     c.pts[u][0])
          inside = !inside;
      }
      if (inside) c.enclosed_z0.push_back(static_cast<int>(q));
    }
  }
  return out;
}

namespace {

bool point_in_curve(const LevelSetCurve& c, double px, double py) {
  bool inside = false;
  for (std::size_t u = 0, v = c.pts.size() - 1; u < c.pts.size(); v = u++) {
    if ((c.pts[u][1] > py) != (c.pts[v][1] > py) &&
        px < (c.pts[v][0] - c.pts[u][0]) * (py - c.pts[u][1]) / (c.pts[v][1] - c.pts[u][1]) +
                 c.pts[u][0])
      inside = !inside;
  }
  return inside;
}

std::array<double, 2> centroid(const LevelSetCurve& c) {
  double sx = 0, sy = 0;
  for (const auto& q : c.pts) { sx += q[0]; sy += q[1]; }
  return {sx / c.pts.size(), sy / c.pts.size()};
}

double point_segment_distance(const std::array<double, 2>& q, const std::array<double, 2>& a,
                              const std::array<double, 2>& b) {
  const double vx = b[0] - a[0], vy = b[1] - a[1];
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((q[0] - a[0]) * vx + (q[1] - a[1]) * vy) / len2, 0.0, 1.0);
  return std::hypot(q[0] - a[0] - t * vx, q[1] - a[1] - t * vy);
}

double point_to_set(const std::array<double, 2>& q, const std::vector<LevelSetCurve>& curves) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : curves)
    for (std::size_t s = 0; s + 1 < c.pts.size(); ++s)
      best = std::min(best, point_segment_distance(q, c.pts[s], c.pts[s + 1]));
  return best;
}

}  // namespace

double z1_rotation_deviation(const Z1Extraction& z1, double angle) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  double worst = 0.0;
  for (int dir = 0; dir < 2; ++dir) {
    const double c = ca, s = dir == 0 ? sa : -sa;
    for (const auto& curve : z1.curves)
      for (const auto& q : curve.pts) {
        const std::array<double, 2> rq{c * q[0] - s * q[1], s * q[0] + c * q[1]};
        worst = std::max(worst, point_to_set(rq, z1.curves));
      }
  }
  return worst;
}

double z1_symmetry_check(const MeromorphicParams& p, ModuliWindow window) {
  if (std::abs(p.k) < 2) throw std::domain_error("z1_symmetry_check: requires |k| >= 2");
  const int fold = p.k >= 2 ? p.k + 1 : -p.k - 1;
  return z1_rotation_deviation(z1_extract(p, window), 2.0 * M_PI / fold);
}

std::vector<ScanRow> bifurcation_scan(int k, std::span<const double> abs_a_schedule, int cells) {
  if (std::abs(k) < 2 && k != -1)
    throw std::domain_error("bifurcation_scan: requires |k| >= 2 or k = -1");
  const double a_star = (std::abs(k) >= 2) ? threshold_a_star(k) : 0.0;
  std::vector<ScanRow> rows;
  for (double aa : abs_a_schedule) {
    if (!(aa > 0.0)) throw std::invalid_argument("bifurcation_scan: |a| must be positive");
    if (a_star > 0.0 && aa / a_star > 0.95 && aa / a_star < 1.05)
      throw std::invalid_argument(
          "bifurcation_scan: |a| inside the ill-conditioned band around a*");
    ScanRow row;
    row.abs_a = aa;
    const MeromorphicParams p{k, Complex{0.0, aa}};
    const Z1Extraction lo = z1_extract(p, {0.0, cells});
    const Z1Extraction hi = z1_extract(p, {0.0, 2 * cells});
    auto count_closed = [](const Z1Extraction& e) {
      int c = 0;
      for (const auto& curve : e.curves) c += curve.closed ? 1 : 0;
      return c;
    };
    row.components = count_closed(hi);
    row.resolved = count_closed(lo) == row.components;
    row.nested = false;
    for (const auto& ca : hi.curves) {
      if (!ca.closed) continue;
      for (const auto& cb : hi.curves) {
        if (&ca == &cb || !cb.closed) continue;
        const auto cen = centroid(cb);
        if (point_in_curve(ca, cen[0], cen[1])) row.nested = true;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// figure export

void emit_figure_svg(const MeromorphicParams& p, const std::string& path, ModuliWindow window) {
  const Z1Extraction z1 = z1_extract(p, window);
  const Z0Set z0 = z0_points(p);
  const double W = z1.window_radius;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(10);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << -W << ' ' << -W << ' '
      << 2 * W << ' ' << 2 * W << "\">\n";
  const double sw = 0.01 * W;
  out << "  <g transform=\"scale(1,-1)\">\n";
  out << "    <line class=\"axis\" x1=\"" << -W << "\" y1=\"0\" x2=\"" << W
      << "\" y2=\"0\" stroke=\"#999\" stroke-width=\"" << 0.3 * sw << "\"/>\n";
  out << "    <line class=\"axis\" x1=\"0\" y1=\"" << -W << "\" x2=\"0\" y2=\"" << W
      << "\" stroke=\"#999\" stroke-width=\"" << 0.3 * sw << "\"/>\n";
  if (!z0.empty()) {
    out << "    <g class=\"z0-layer\">\n";
    for (const Complex& q : z0.points)
      out << "      <circle class=\"z0\" cx=\"" << q.real() << "\" cy=\"" << q.imag()
          << "\" r=\"" << 1.5 * sw << "\" fill=\"blue\"/>\n";
    if (z0.circle_radius2)
      out << "      <circle class=\"z0\" cx=\"0\" cy=\"0\" r=\"" << std::sqrt(*z0.circle_radius2)
          << "\" fill=\"none\" stroke=\"blue\" stroke-width=\"" << sw << "\"/>\n";
    out << "    </g>\n";
  }
  out << "    <g class=\"z1-layer\">\n";
  for (const auto& c : z1.curves) {
    out << "      <polyline class=\"z1\" fill=\"none\" stroke=\"red\" stroke-width=\"" << sw
        << "\" points=\"";
    for (const auto& q : c.pts) out << q[0] << ',' << q[1] << ' ';
    out << "\"/>\n";
  }
  out << "    </g>\n";
  out << "  </g>\n";
  if (std::abs(p.k) >= 2) {
    out << "  <text x=\"" << -0.95 * W << "\" y=\"" << -0.85 * W << "\" font-size=\"" << 0.08 * W
        << "\">|a|/a* = " << std::abs(p.a) / threshold_a_star(p.k) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

void emit_figure_csv(const MeromorphicParams& p, const std::string& path, ModuliWindow window) {
  const Z1Extraction z1 = z1_extract(p, window);
  const Z0Set z0 = z0_points(p);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  out << "set,component,x1,x2\n";
  int id = 0;
  for (const Complex& q : z0.points) out << "z0," << id++ << ',' << q.real() << ',' << q.imag() << '\n';
  if (z0.circle_radius2) {
    const double rad = std::sqrt(*z0.circle_radius2);
    for (int s = 0; s < 256; ++s) {
      const double th = 2.0 * M_PI * s / 256;
      out << "z0," << id << ',' << rad * std::cos(th) << ',' << rad * std::sin(th) << '\n';
    }
  }
  for (const auto& c : z1.curves)
    for (const auto& q : c.pts) out << "z1," << c.component_id << ',' << q[0] << ',' << q[1] << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

int count_csv_z1_components(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::set<int> ids;
  while (std::getline(in, line)) {
    if (line.rfind("z1,", 0) != 0) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    ids.insert(std::stoi(line.substr(c1 + 1, c2 - c1 - 1)));
  }
  return static_cast<int>(ids.size());
}

}  // namespace skylab
