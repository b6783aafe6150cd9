#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqfilter/core.hpp"
#include "sqfilter/noise.hpp"

namespace sqf {

/// Everything a run needs. Defaults reproduce the first figure's preset
/// (mu = 0.01 omega, theta0 = 0, vartheta = 0.05) with rho0 = 0.5.
struct RunConfig {
  Scheme scheme = Scheme::DoubleHeterodyne;
  double omega = 1.0;
  double mu = 0.01;
  double phi0 = 0.0;
  double vartheta = 0.05;
  double rho0 = 0.5;
  double theta0 = 0.0;
  cplx alpha0{0.0, 0.0};
  double t_max = 100.0;
  double dt = 0.01;
  std::uint64_t seed = 1;
  std::size_t trajectories = 1;
  int cutoff = 0;  // Fock cutoff for oracle work; 0 picks one automatically
  std::vector<std::string> outputs{"frames", "stats", "manifest"};
  std::size_t frames = 1000;  // decimated output length
  bool full_resolution = false;
  std::size_t threads = 0;  // 0 = hardware concurrency

  ModelParams model() const { return {omega, mu, phi0, vartheta, scheme}; }
  SqueezeParam xi0() const { return SqueezeParam(rho0, theta0); }
  TimeGrid grid() const { return TimeGrid(t_max, dt); }
  NoiseKind noise_kind() const {
    return scheme == Scheme::DoubleHeterodyne ? NoiseKind::Complex : NoiseKind::Real;
  }
  bool wants(const std::string& output) const;

  /// Throws ConfigError on any violated bound.
  void validate() const;
};

/// Keys accepted in config files and as --key overrides, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value. Unknown keys and malformed values
/// throw ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses `key = value` lines; '#' starts a comment. Unknown or repeated
/// keys are errors.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Canonical textual form of every key (parse_config inverts it).
std::map<std::string, std::string> config_values(const RunConfig& cfg);
std::string format_config(const RunConfig& cfg);

}  // namespace sqf
