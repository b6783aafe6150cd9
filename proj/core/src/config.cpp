#include "sqfilter/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "sqfilter/csv.hpp"

namespace sqf {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  return out;
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true|false, got '" + text + "'");
}

// "re" or "re,im"
cplx parse_complex(const std::string& key, const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return {parse_double(key, text), 0.0};
  return {parse_double(key, text.substr(0, comma)), parse_double(key, text.substr(comma + 1))};
}

std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::set<std::string>& known_outputs() {
  static const std::set<std::string> names{"frames", "stats", "density", "manifest"};
  return names;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"scheme", [](RunConfig& c, const auto&, const auto& v) { c.scheme = scheme_from_string(trim(v)); }},
      {"omega", [](RunConfig& c, const auto& k, const auto& v) { c.omega = parse_double(k, v); }},
      {"mu", [](RunConfig& c, const auto& k, const auto& v) { c.mu = parse_double(k, v); }},
      {"phi0", [](RunConfig& c, const auto& k, const auto& v) { c.phi0 = parse_double(k, v); }},
      {"vartheta", [](RunConfig& c, const auto& k, const auto& v) { c.vartheta = parse_double(k, v); }},
      {"rho0", [](RunConfig& c, const auto& k, const auto& v) { c.rho0 = parse_double(k, v); }},
      {"theta0", [](RunConfig& c, const auto& k, const auto& v) { c.theta0 = parse_double(k, v); }},
      {"alpha0", [](RunConfig& c, const auto& k, const auto& v) { c.alpha0 = parse_complex(k, v); }},
      {"t_max", [](RunConfig& c, const auto& k, const auto& v) { c.t_max = parse_double(k, v); }},
      {"dt", [](RunConfig& c, const auto& k, const auto& v) { c.dt = parse_double(k, v); }},
      {"seed", [](RunConfig& c, const auto& k, const auto& v) { c.seed = parse_integer<std::uint64_t>(k, v); }},
      {"trajectories",
       [](RunConfig& c, const auto& k, const auto& v) { c.trajectories = parse_integer<std::size_t>(k, v); }},
      {"cutoff", [](RunConfig& c, const auto& k, const auto& v) { c.cutoff = parse_integer<int>(k, v); }},
      {"outputs", [](RunConfig& c, const auto&, const auto& v) { c.outputs = parse_list(v); }},
      {"frames", [](RunConfig& c, const auto& k, const auto& v) { c.frames = parse_integer<std::size_t>(k, v); }},
      {"full_resolution",
       [](RunConfig& c, const auto& k, const auto& v) { c.full_resolution = parse_bool(k, v); }},
      {"threads", [](RunConfig& c, const auto& k, const auto& v) { c.threads = parse_integer<std::size_t>(k, v); }},
  };
  return table;
}

}  // namespace

bool RunConfig::wants(const std::string& output) const {
  return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
}

void RunConfig::validate() const {
  model().validate();
  (void)xi0();
  (void)grid();
  if (!std::isfinite(alpha0.real()) || !std::isfinite(alpha0.imag()))
    throw ConfigError("alpha0 must be finite");
  if (dt > t_max / 100.0 * (1.0 + 1e-12)) throw ConfigError("dt must be <= t_max/100");
  if (trajectories < 1) throw ConfigError("trajectories must be >= 1");
  if (cutoff != 0 && cutoff < 8) throw ConfigError("cutoff must be 0 (auto) or >= 8");
  if (frames < 2) throw ConfigError("frames must be >= 2");
  for (const auto& o : outputs)
    if (!known_outputs().contains(o)) throw ConfigError("unknown output '" + o + "'");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "scheme", "omega",  "mu",      "phi0",         "vartheta", "rho0",
      "theta0", "alpha0", "t_max",   "dt",           "seed",     "trajectories",
      "cutoff", "outputs", "frames", "full_resolution", "threads"};
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, key, value);
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    apply_setting(base, key, trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::map<std::string, std::string> config_values(const RunConfig& cfg) {
  std::string outputs;
  for (const auto& o : cfg.outputs) outputs += (outputs.empty() ? "" : ",") + o;
  return {
      {"scheme", to_string(cfg.scheme)},
      {"omega", csv_number(cfg.omega)},
      {"mu", csv_number(cfg.mu)},
      {"phi0", csv_number(cfg.phi0)},
      {"vartheta", csv_number(cfg.vartheta)},
      {"rho0", csv_number(cfg.rho0)},
      {"theta0", csv_number(cfg.theta0)},
      {"alpha0", csv_number(cfg.alpha0.real()) + "," + csv_number(cfg.alpha0.imag())},
      {"t_max", csv_number(cfg.t_max)},
      {"dt", csv_number(cfg.dt)},
      {"seed", std::to_string(cfg.seed)},
      {"trajectories", std::to_string(cfg.trajectories)},
      {"cutoff", std::to_string(cfg.cutoff)},
      {"outputs", outputs},
      {"frames", std::to_string(cfg.frames)},
      {"full_resolution", cfg.full_resolution ? "true" : "false"},
      {"threads", std::to_string(cfg.threads)},
  };
}

std::string format_config(const RunConfig& cfg) {
  const auto values = config_values(cfg);
  std::string out;
  for (const auto& key : config_keys()) out += key + " = " + values.at(key) + "\n";
  return out;
}

}  // namespace sqf
