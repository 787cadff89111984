// skyrmion-lab: evaluate energies, run flows and sweeps, extract the
// Z0/Z1 solution-set geometry, and emit reports.
//
// Exit codes: 0 ok, 2 usage or parse error, 3 numeric error,
//             4 unresolved degree / component count.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skylab/energy.hpp"
#include "skylab/family_parse.hpp"
#include "skylab/flow.hpp"
#include "skylab/grid.hpp"
#include "skylab/maps.hpp"
#include "skylab/moduli.hpp"
#include "skylab/reduce.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUnresolved = 4;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

void write_text(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
}

std::string sweep_csv(const std::vector<skylab::SweepRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "r,k,scale,E,theorem_value,gap\n";
  for (const auto& row : rows) {
    os << row.r << ',' << row.k << ',';
    if (std::isinf(row.scale)) os << "inf";
    else os << row.scale;
    os << ',' << row.E << ',' << row.theorem_value << ',' << row.gap << '\n';
  }
  return os.str();
}

// Flat "key = value" config: inject as synthetic flags ahead of the real
// command line, so explicit flags win.
std::vector<std::string> apply_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::runtime_error("--config needs a path");
      config_path = args[i + 1];
      ++i;
    } else {
      out.push_back(args[i]);
    }
  }
  if (!config_path) return out;
  const auto kv = skylab::parse_config_file(*config_path);
  std::vector<std::string> merged;
  if (!out.empty()) merged.push_back(out.front());  // subcommand name
  for (const auto& [key, value] : kv) {
    merged.push_back("--" + key);
    merged.push_back(value);
  }
  merged.insert(merged.end(), out.begin() + (out.empty() ? 0 : 1), out.end());
  return merged;
}

int run(std::vector<std::string> args) {
  CLI::App app{"numerical laboratory for chiral skyrmion energies on the plane"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // --h is the Zeeman parameter

  // ---- energy ----
  auto* energy_cmd = app.add_subcommand("energy", "evaluate the energy breakdown of a family");
  energy_cmd->set_help_flag("--help");
  std::string family, out_path, format = "json", save_field;
  double r = 1.0, h = 0.0;
  int N = 0;
  double S = 0.0;
  energy_cmd->add_option("--family", family, "family string")->required();
  energy_cmd->add_option("--r", r, "DM coupling r")->take_last();
  energy_cmd->add_option("--h", h, "Zeeman perturbation h")->take_last();
  energy_cmd->add_option("--N", N, "samples per axis (default: family choice)")->take_last();
  energy_cmd->add_option("--S", S, "grid half width (default: family choice)")->take_last();
  energy_cmd->add_option("--out", out_path, "output path ('-' = stdout)")->take_last();
  energy_cmd->add_option("--format", format, "json")->take_last();
  energy_cmd->add_option("--save-field", save_field, "also write the sampled field (.sfld)")
      ->take_last();

  // ---- sweep ----
  auto* sweep_cmd = app.add_subcommand("sweep", "minimal-energy table or divergence run");
  sweep_cmd->set_help_flag("--help");
  std::string r_list, k_list = "-3,-2,-1,0,1,2,3", R_list = "8,16,32", L_list;
  double sweep_r = 0.0, lambda_pos = 0.05;
  int sweep_k = -1;
  sweep_cmd->add_option("--r-list", r_list, "r values for the minimal-energy table")->take_last();
  sweep_cmd->add_option("--k-list", k_list, "degrees")->take_last();
  sweep_cmd->add_option("--R-list", R_list, "gluing radii schedule")->take_last();
  sweep_cmd->add_option("--lambda", lambda_pos, "anti-skyrmion core for k > 0")->take_last();
  sweep_cmd->add_option("--r", sweep_r, "single r (divergence mode, r > 1)")->take_last();
  sweep_cmd->add_option("--k", sweep_k, "degree (divergence mode)")->take_last();
  sweep_cmd->add_option("--L-list", L_list, "stretch lengths; presence selects divergence mode")
      ->take_last();
  sweep_cmd->add_option("--out", out_path, "CSV output path")->take_last();

  // ---- moduli ----
  auto* moduli_cmd = app.add_subcommand("moduli", "Z0/Z1 geometry of the endpoint families");
  moduli_cmd->set_help_flag("--help");
  int mk = 2, cells = 768;
  std::string a_text = "", svg_path, csv_path, a_list;
  double window = 0.0;
  moduli_cmd->add_option("--k", mk, "power of f(z) = a z^k")->take_last();
  moduli_cmd->add_option("--a", a_text, "complex coefficient, e.g. 0+0.1i")->take_last();
  moduli_cmd->add_option("--svg", svg_path, "write the Z0/Z1 figure")->take_last();
  moduli_cmd->add_option("--csv", csv_path, "write set,component,x1,x2 rows")->take_last();
  moduli_cmd->add_option("--window", window, "window radius (0 = auto)")->take_last();
  moduli_cmd->add_option("--cells", cells, "marching-squares cells per axis")->take_last();
  moduli_cmd->add_option("--out", out_path, "report path ('-' = stdout)")->take_last();
  auto* scan_cmd = moduli_cmd->add_subcommand("scan", "component counts across a*");
  scan_cmd->set_help_flag("--help");
  scan_cmd->add_option("--k", mk, "power k")->take_last();
  scan_cmd->add_option("--a-list", a_list, "|a| schedule (default 0.5 a*, 2 a*)")->take_last();
  scan_cmd->add_option("--cells", cells, "cells per axis")->take_last();
  scan_cmd->add_option("--out", out_path, "table path ('-' = stdout)")->take_last();

  // ---- stability ----
  auto* stab_cmd = app.add_subcommand("stability", "probe the homogeneous state or flow a family");
  stab_cmd->set_help_flag("--help");
  double st_r = 0.8, st_h = 0.0, noise = 0.0;
  std::string st_family, lambda_list = "1,2,4,8,16,20,32", t_list = "0.001,0.01";
  std::uint64_t seed = 1;
  int max_iters = 500;
  stab_cmd->add_option("--r", st_r, "DM coupling")->take_last();
  stab_cmd->add_option("--h", st_h, "Zeeman perturbation")->take_last();
  stab_cmd->add_option("--family", st_family, "flow this family instead of probing e3")
      ->take_last();
  stab_cmd->add_option("--noise", noise, "tangent noise sup-norm added before the flow")
      ->take_last();
  stab_cmd->add_option("--seed", seed, "seed for the probe noise")->take_last();
  stab_cmd->add_option("--lambdas", lambda_list, "dilation scan")->take_last();
  stab_cmd->add_option("--t-list", t_list, "amplitude scan")->take_last();
  stab_cmd->add_option("--max-iters", max_iters, "flow iteration cap")->take_last();
  stab_cmd->add_option("--out", out_path, "report / flow-log path")->take_last();

  try {
    args = apply_config(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    std::vector<const char*> argv;
    argv.push_back("skyrmion-lab");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return kExitOk;
    }
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*energy_cmd) {
      if (format != "json") {
        std::cerr << "error: energy supports --format json\n";
        return kExitUsage;
      }
      skylab::MapPtr map;
      try {
        map = skylab::parse_family(family);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
      }
      skylab::GridSpec grid = map->default_grid();
      if (S > 0.0) grid.half_width = S;
      if (N > 0) grid.samples = N;
      const skylab::SphereField field = skylab::sample(*map, grid);
      const skylab::EnergyBreakdown b = skylab::evaluate(field, r, h);
      write_text(out_path, skylab::to_json(b));
      if (!save_field.empty()) skylab::write_sfld(field, save_field);
      return kExitOk;
    }

    if (*sweep_cmd) {
      if (!L_list.empty()) {
        if (!(sweep_r > 1.0)) {
          std::cerr << "error: divergence sweep needs --r > 1\n";
          return kExitUsage;
        }
        const auto Ls = parse_list(L_list);
        const auto res = skylab::divergence_sweep(sweep_r, sweep_k, Ls);
        std::ostringstream os;
        os << sweep_csv(res.rows);
        os << "# fitted_slope=" << res.fitted_slope << " tail_slope=" << res.tail_slope
           << " slope_oracle=" << res.slope_oracle << " decreasing=" << res.decreasing << "\n";
        write_text(out_path, os.str());
        return kExitOk;
      }
      if (r_list.empty()) {
        std::cerr << "error: sweep needs --r-list (or --L-list for divergence mode)\n";
        return kExitUsage;
      }
      const auto rs = parse_list(r_list);
      const auto ks = parse_int_list(k_list);
      const auto Rs = parse_list(R_list);
      if (rs.empty() || ks.empty()) {
        std::cerr << "error: empty sweep lists\n";
        return kExitUsage;
      }
      const auto rows = skylab::minimal_energy_sweep(rs, ks, Rs, lambda_pos);
      write_text(out_path, sweep_csv(rows));
      for (const auto& row : rows)
        if (!row.resolved) {
          std::cerr << "warning: unresolved degree in sweep row r=" << row.r << " k=" << row.k
                    << "\n";
          return kExitUnresolved;
        }
      return kExitOk;
    }

    if (*moduli_cmd) {
      if (std::abs(mk) < 2 && mk != -1 && !*scan_cmd) {
        if (mk == 1)
          std::cerr << "error: k=1 maps are the distorted family; use "
                       "'energy --family distorted:a=...'\n";
        else
          std::cerr << "error: moduli needs |k| >= 2 or k = -1 (k=0 is a translated "
                       "skyrmion)\n";
        return kExitUsage;
      }
      if (*scan_cmd) {
        std::vector<double> schedule;
        if (a_list.empty()) {
          const double a_star = skylab::threshold_a_star(mk);
          schedule = {0.5 * a_star, 2.0 * a_star};
        } else {
          schedule = parse_list(a_list);
        }
        const auto rows = skylab::bifurcation_scan(mk, schedule, cells);
        std::ostringstream os;
        os << "abs_a,components,nested,resolved\n";
        bool all_resolved = true;
        os.precision(17);
        for (const auto& row : rows) {
          os << row.abs_a << ',' << row.components << ',' << row.nested << ',' << row.resolved
             << '\n';
          all_resolved = all_resolved && row.resolved;
        }
        write_text(out_path, os.str());
        return all_resolved ? kExitOk : kExitUnresolved;
      }
      skylab::MeromorphicParams params;
      params.k = mk;
      if (a_text.empty()) {
        std::cerr << "error: moduli needs --a\n";
        return kExitUsage;
      }
      params.a = skylab::parse_complex(a_text);
      const skylab::ModuliWindow win{window, cells};
      if (!svg_path.empty()) skylab::emit_figure_svg(params, svg_path, win);
      if (!csv_path.empty()) skylab::emit_figure_csv(params, csv_path, win);
      const auto z1 = skylab::z1_extract(params, win);
      int closed = 0;
      for (const auto& c : z1.curves) closed += c.closed ? 1 : 0;
      std::cout << "window_radius=" << z1.window_radius << " components=" << closed
                << " open=" << z1.open_components << "\n";
      if (z1.open_components > 0) {
        std::cerr << "warning: open curve at the window boundary; retry with --window "
                  << 2.0 * z1.window_radius << "\n";
        return kExitUnresolved;
      }
      return kExitOk;
    }

    if (*stab_cmd) {
      if (!st_family.empty()) {
        skylab::MapPtr map;
        try {
          map = skylab::parse_family(st_family);
        } catch (const std::exception& e) {
          std::cerr << "error: " << e.what() << "\n";
          return kExitUsage;
        }
        skylab::SphereField start = skylab::sample(*map, map->default_grid());
        if (noise > 0.0) start = skylab::add_tangent_noise(start, noise, seed);
        skylab::FlowParams fp;
        fp.max_iters = max_iters;
        const auto traj = skylab::gradient_flow(start, st_r, st_h, fp);
        const double e0 = traj.energy.front(), e1 = traj.energy.back();
        std::ostringstream os;
        os.precision(17);
        os << "iter,E,Q_raw,step\n";
        for (std::size_t i = 0; i < traj.energy.size(); ++i)
          os << i << ',' << traj.energy[i] << ',' << traj.q_raw[i] << ','
             << (i == 0 ? 0.0 : traj.step[i - 1]) << '\n';
        write_text(out_path, os.str());
        const bool descended = e1 < e0 - 1e-6 * (1.0 + std::abs(e0));
        std::cout << map->describe() << (descended ? " unstable" : " stationary")
                  << " (E: " << e0 << " -> " << e1 << " in " << traj.iterations
                  << " iterations, " << skylab::to_string(traj.reason) << ")\n";
        return kExitOk;
      }
      const auto lambdas = parse_list(lambda_list);
      const auto ts = parse_list(t_list);
      double max_l2 = 0.0, max_l4 = 0.0;
      if (st_h == 0.0) max_l2 = 0.1;
      if (st_h > 0.0) max_l4 = 0.5;
      const auto report = skylab::probe_homogeneous_stability(st_r, st_h, lambdas, ts, max_l2,
                                                              max_l4);
      std::ostringstream os;
      os.precision(10);
      os << "lambda,t,l2,l4,gap,quad_form\n";
      for (const auto& p : report.probes)
        os << p.lambda << ',' << p.t << ',' << p.l2 << ',' << p.l4 << ',' << p.gap << ','
           << p.quad_form << '\n';
      write_text(out_path, os.str());
      std::cout << "verdict: " << report.verdict;
      if (report.witness)
        std::cout << " [lambda=" << report.witness->lambda << " t=" << report.witness->t
                  << " gap=" << report.witness->gap << "]";
      std::cout << "\n";
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}
