#pragma once

// Command-line front end. Exit codes: 0 success (a contact stop included),
// 1 bad input or a failed check, 2 runtime failure.

#include "fsislip/diagnostics.hpp"
#include "fsislip/io.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

namespace fsislip {

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitRuntime = 2 };

namespace detail {

inline int cmd_simulate(const std::string& config_path, const std::string& out_override, unsigned threads,
                        std::ostream& out)
{
  ParsedConfig parsed = load_config(config_path);
  SimulationConfig cfg = parsed.config;
  if (threads > 0)
    cfg.threads = threads;
  const std::string dir = out_override.empty() ? cfg.out_dir : out_override;
  ensure_directory(dir);

  const SnapshotCallback snap = [&](const SnapshotView& v) { write_snapshot(dir, v.mesh, v.z, v.detJ, v.step); };
  const SimulationResult res = simulate(cfg, snap);
  const std::string csv = (std::filesystem::path(dir) / "trajectory.csv").string();
  write_trajectory(csv, res.rows);

  const auto& last = res.rows.back();
  out << "stop reason: " << to_string(res.stop);
  if (!res.stop_detail.empty())
    out << " (" << res.stop_detail << ")";
  out << "\n";
  out << "steps: " << res.rows.size() - 1 << ", t = " << last.t << ", gap = " << last.gap << "\n";
  out << "trajectory: " << csv << "\n";
  return kExitOk;
}

inline int cmd_check_operators(std::uint64_t seed, std::ostream& out)
{
  const SimulationConfig cfg;
  const Mesh mesh = generate_annulus_mesh(cfg.mesh_params());
  const SelfCheckReport rep = operator_selfcheck(mesh, cfg.mu, cfg.beta, seed);
  const bool ok = rep.symmetry <= 1e-12 && rep.min_quadratic >= 0.0 && rep.energy_identity <= 1e-12;
  out << std::scientific << std::setprecision(3);
  out << "samples:          " << rep.samples << "\n";
  out << "symmetry:         " << rep.symmetry << "\n";
  out << "positivity:       " << rep.positivity << " (min <Az,z> = " << rep.min_quadratic << ")\n";
  out << "energy identity:  " << rep.energy_identity << "\n";
  out << (ok ? "operator checks passed" : "operator checks FAILED") << "\n";
  return ok ? kExitOk : kExitInvalid;
}

inline int cmd_manufactured(std::size_t levels, std::ostream& out)
{
  const auto table = taylor_couette_study(levels);
  out << std::setw(5) << "level" << std::setw(7) << "n_r" << std::setw(9) << "n_theta" << std::setw(13) << "h_max"
      << std::setw(13) << "L2_error" << std::setw(13) << "rel_error" << std::setw(9) << "order"
      << "\n";
  for (const auto& l : table) {
    out << std::setw(5) << l.level << std::setw(7) << l.n_radial << std::setw(9) << l.n_angular << std::scientific
        << std::setprecision(4) << std::setw(13) << l.h_max << std::setw(13) << l.l2_error << std::setw(13)
        << l.relative_error << std::fixed << std::setprecision(3) << std::setw(9);
    if (std::isnan(l.order))
      out << "-";
    else
      out << l.order;
    out << "\n";
  }
  return kExitOk;
}

inline int cmd_validate(const std::string& config_path, std::ostream& out)
{
  const ParsedConfig parsed = load_config(config_path);
  out << "config OK: " << config_path << "\n";
  if (!parsed.defaults_applied.empty()) {
    out << "defaults applied:\n";
    for (const auto& d : parsed.defaults_applied)
      out << "  " << d << "\n";
  }
  return kExitOk;
}

} // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
  CLI::App app{"Rigid disk in a viscous fluid with Navier slip on the body"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  unsigned threads = 0;
  auto* sim = app.add_subcommand("simulate", "run a configured simulation");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--out", out_dir, "output directory (overrides [output] out_dir)");
  sim->add_option("--threads", threads, "worker threads for the flow map");

  std::uint64_t seed = 1;
  auto* chk = app.add_subcommand("check-operators", "symmetry, positivity and energy identity of A");
  chk->add_option("--seed", seed, "random seed");

  std::size_t levels = 3;
  auto* man = app.add_subcommand("manufactured", "Taylor-Couette convergence study");
  man->add_option("--levels", levels, "number of mesh levels")->check(CLI::Range(1, 8));

  std::string validate_path;
  auto* val = app.add_subcommand("validate-config", "parse and check a config file");
  val->add_option("--config", validate_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*sim)
      return detail::cmd_simulate(config_path, out_dir, threads, out);
    if (*chk)
      return detail::cmd_check_operators(seed, out);
    if (*man)
      return detail::cmd_manufactured(levels, out);
    if (*val)
      return detail::cmd_validate(validate_path, out);
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ParameterError& e) {
    err << "invalid parameter: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SimulationError& e) {
    err << "simulation failed: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr)
{
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("fsislip");
  for (const auto& a : args)
    argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace fsislip
