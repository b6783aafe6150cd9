#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <locale>
#include <map>
#include <optional>
#include <sstream>

#include "sqfilter/config.hpp"
#include "sqfilter/csv.hpp"
#include "sqfilter/runner.hpp"

#ifndef SQFILTER_VERSION
#define SQFILTER_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitOracle = 4;

struct ConfigOptions {
  std::string file;
  std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* sub, ConfigOptions& opts) {
  sub->add_option("-c,--config", opts.file, "key = value config file");
  for (const auto& key : sqf::config_keys())
    sub->add_option("--" + key, opts.overrides[key], "override config key '" + key + "'");
}

sqf::RunConfig resolve(CLI::App* sub, const ConfigOptions& opts) {
  sqf::RunConfig cfg = opts.file.empty() ? sqf::RunConfig{} : sqf::load_config(opts.file);
  for (const auto& key : sqf::config_keys())
    if (sub->count("--" + key) > 0) sqf::apply_setting(cfg, key, opts.overrides.at(key));
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw sqf::ConfigError("cannot write '" + path.string() + "'");
  return out;
}

json manifest_base(const std::string& command, const sqf::RunConfig& cfg) {
  json m;
  m["command"] = command;
  m["code_version"] = SQFILTER_VERSION;
  m["seed"] = cfg.seed;
  m["config"] = sqf::config_values(cfg);
  return m;
}

void write_manifest(const fs::path& dir, const json& m) {
  auto out = open_output(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

int cmd_simulate(const sqf::RunConfig& cfg, const fs::path& dir, std::size_t index) {
  const auto frames = sqf::run_trajectory(cfg, index);
  json m = manifest_base("simulate", cfg);
  m["trajectory"] = index;
  if (cfg.wants("frames")) {
    const auto indices = sqf::output_indices(cfg);
    auto out = open_output(dir / "trajectory.csv");
    sqf::write_trajectory_csv(out, frames, indices);
    m["files"].push_back("trajectory.csv");
    m["rows"] = indices.size();
  }
  if (cfg.wants("manifest")) write_manifest(dir, m);
  std::cout << "simulated trajectory " << index << " (" << frames.size() << " grid points)\n";
  return 0;
}

int cmd_ensemble(const sqf::RunConfig& cfg, const fs::path& dir) {
  sqf::EnsembleOptions options;
  if (cfg.wants("density"))
    for (const double f : {0.2, 0.5, 1.0}) {
      const double k = std::round(f / cfg.mu / cfg.dt);
      if (k * cfg.dt <= cfg.t_max) options.density_times.push_back(k * cfg.dt);
    }
  const auto stats = sqf::run_ensemble(cfg, options);
  json m = manifest_base("ensemble", cfg);
  m["completed"] = stats.completed;
  m["failures"] = json::array();
  for (const auto& f : stats.failures)
    m["failures"].push_back({{"trajectory", f.index}, {"message", f.message}});
  if (cfg.wants("stats")) {
    auto out = open_output(dir / "ensemble.csv");
    sqf::write_ensemble_csv(out, stats);
    m["files"].push_back("ensemble.csv");
  }
  if (!stats.density.empty()) {
    auto out = open_output(dir / "density.csv");
    out << "t,trace_distance\n";
    for (const auto& d : stats.density)
      out << sqf::csv_number(d.t) << ',' << sqf::csv_number(d.trace_distance) << '\n';
    m["files"].push_back("density.csv");
    m["density_cutoff"] = stats.cutoff;
  }
  if (cfg.wants("manifest")) write_manifest(dir, m);
  std::cout << "ensemble: " << stats.completed << " of " << stats.requested
            << " trajectories completed\n";
  if (!stats.checkpoints.empty()) {
    const auto& last = stats.checkpoints.back();
    std::cout << "mean |l|^2 at t=" << last.t << ": " << last.mean_norm2 << " +- "
              << last.stderr_norm2 << '\n';
  }
  return 0;
}

int cmd_figure(const sqf::FigureSpec& spec, const fs::path& dir) {
  const auto rows = sqf::figure_data(spec);
  std::ostringstream rho;
  rho.imbue(std::locale::classic());
  rho << spec.rho0;
  const std::string stem =
      "figure" + std::to_string(static_cast<int>(spec.which)) + "_rho" + rho.str();
  const std::string name = stem + ".csv";
  auto out = open_output(dir / name);
  sqf::write_figure_csv(out, rows);
  json m;
  m["command"] = "figure";
  m["code_version"] = SQFILTER_VERSION;
  m["which"] = static_cast<int>(spec.which);
  m["config"] = {{"rho0", spec.rho0},     {"omega", spec.omega},       {"mu", spec.mu},
                 {"theta0", spec.theta0}, {"vartheta", spec.vartheta}, {"tau_max", spec.tau_max}};
  m["phi0"] = spec.which == sqf::Figure::SingleHeterodyne ? sqf::kPi / 2 : 0.0;
  m["tau_samples"] = spec.samples;
  m["files"] = {name};
  auto mout = open_output(dir / (stem + ".json"));
  mout << m.dump(2) << '\n';
  std::cout << "wrote " << (dir / name).string() << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_oracle(const sqf::RunConfig& cfg, const sqf::OracleOptions& options,
               const fs::path& dir) {
  const auto report = sqf::oracle_check(cfg, options);
  const std::string text = sqf::oracle_report_json(report);
  std::cout << text << '\n';
  auto out = open_output(dir / "oracle_report.json");
  out << text << '\n';
  if (cfg.wants("manifest")) {
    json m = manifest_base("oracle-check", cfg);
    m["files"] = {"oracle_report.json"};
    write_manifest(dir, m);
  }
  return report.passed() ? 0 : kExitOracle;
}

int cmd_noise_dump(const sqf::RunConfig& cfg, const fs::path& dir, std::size_t index) {
  const sqf::TrajectoryRunner runner(cfg);
  auto out = open_output(dir / "noise.csv");
  sqf::write_path_csv(out, runner.noise(index));
  if (cfg.wants("manifest")) {
    json m = manifest_base("noise-dump", cfg);
    m["trajectory"] = index;
    m["files"] = {"noise.csv"};
    write_manifest(dir, m);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior squeezed coherent states under heterodyne detection"};
  app.set_version_flag("--version", std::string(SQFILTER_VERSION));
  app.require_subcommand(1);

  std::string out_dir = ".";
  std::size_t traj_index = 0;

  auto* simulate = app.add_subcommand("simulate", "single posterior trajectory");
  ConfigOptions sim_opts;
  add_config_options(simulate, sim_opts);
  simulate->add_option("-o,--out", out_dir, "output directory");
  simulate->add_option("--trajectory", traj_index, "trajectory index (noise stream)");

  auto* ensemble = app.add_subcommand("ensemble", "ensemble statistics over trajectories");
  ConfigOptions ens_opts;
  add_config_options(ensemble, ens_opts);
  ensemble->add_option("-o,--out", out_dir, "output directory");

  auto* figure = app.add_subcommand("figure", "uncertainty curves against tau = omega t");
  sqf::FigureSpec spec;
  int which = 1;
  figure->add_option("--which", which, "1 = double heterodyne, 2 = single heterodyne")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  figure->add_option("--rho0", spec.rho0, "initial squeeze")->required();
  figure->add_option("--omega", spec.omega);
  figure->add_option("--mu", spec.mu);
  figure->add_option("--theta0", spec.theta0);
  figure->add_option("--vartheta", spec.vartheta);
  figure->add_option("--tau-max", spec.tau_max);
  figure->add_option("--samples", spec.samples);
  figure->add_option("-o,--out", out_dir, "output directory");

  auto* oracle = app.add_subcommand("oracle-check", "closed forms against the Fock oracle");
  ConfigOptions ora_opts;
  add_config_options(oracle, ora_opts);
  sqf::OracleOptions oracle_options;
  oracle->add_option("--paths", oracle_options.paths, "shared noise paths");
  oracle->add_option("--checkpoints", oracle_options.checkpoints, "comparison times per path");
  oracle->add_option("--tolerance", oracle_options.tolerance, "moment tolerance (default 100 dt)");
  oracle->add_option("--convergence-dts", oracle_options.convergence_dts, "step sizes of the convergence study")->delimiter(',');
  oracle->add_option("--convergence-paths", oracle_options.convergence_paths, "paths in the convergence study");
  bool no_convergence = false;
  oracle->add_flag("--no-convergence", no_convergence, "skip the dt halving study");
  oracle->add_option("-o,--out", out_dir, "output directory");

  auto* noise = app.add_subcommand("noise-dump", "write one noise path as CSV");
  ConfigOptions noise_opts;
  add_config_options(noise, noise_opts);
  noise->add_option("-o,--out", out_dir, "output directory");
  noise->add_option("--trajectory", traj_index, "trajectory index (noise stream)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(resolve(simulate, sim_opts), out_dir, traj_index);
    if (*ensemble) return cmd_ensemble(resolve(ensemble, ens_opts), out_dir);
    if (*figure) {
      spec.which = static_cast<sqf::Figure>(which);
      return cmd_figure(spec, out_dir);
    }
    if (*oracle) {
      if (no_convergence) oracle_options.convergence_dts.clear();
      return cmd_oracle(resolve(oracle, ora_opts), oracle_options, out_dir);
    }
    if (*noise) return cmd_noise_dump(resolve(noise, noise_opts), out_dir, traj_index);
  } catch (const sqf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sqf::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
