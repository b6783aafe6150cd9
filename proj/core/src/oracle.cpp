#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "sqfilter/csv.hpp"
#include "sqfilter/fock.hpp"
#include "sqfilter/runner.hpp"

namespace sqf {
namespace {

struct Observables {
  QuadratureMoments moments;
  double norm2 = 0.0;
};

Observables observe(const fock::FockVector& psi) {
  return {fock::quadrature_moments(psi), psi.norm2()};
}

Observables observe(const PosteriorFrame& f) { return {f.moments, std::norm(f.record.l)}; }

double max_abs_diff(const Observables& a, const Observables& b) {
  return std::max({std::abs(a.moments.meanX - b.moments.meanX),
                   std::abs(a.moments.meanY - b.moments.meanY),
                   std::abs(a.moments.dX - b.moments.dX), std::abs(a.moments.dY - b.moments.dY),
                   std::abs(a.norm2 - b.norm2)});
}

// l S(xi)|alpha> in the number basis, no tail check.
fock::FockVector assemble(const PosteriorFrame& f, int cutoff) {
  fock::FockVector psi = fock::build_squeezed_coherent(
      f.record.squeeze, f.record.alpha, cutoff, fock::SqueezeConstruction::NormalOrdered,
      std::numeric_limits<double>::infinity());
  psi.amplitudes *= f.record.l;
  return psi;
}

// Fock filter along `path`, snapshots at the requested grid indices.
std::vector<fock::FockVector> integrate_filter(const NoisePath& path, const RunConfig& cfg,
                                               int cutoff,
                                               const std::vector<std::size_t>& snapshots) {
  const ModelParams params = cfg.model();
  fock::FockVector psi = fock::build_squeezed_coherent(cfg.xi0(), cfg.alpha0, cutoff);
  std::vector<fock::FockVector> out;
  out.reserve(snapshots.size());
  std::size_t next = 0;
  for (std::size_t k = 0; k <= path.grid.n_steps(); ++k) {
    while (next < snapshots.size() && snapshots[next] == k) {
      out.push_back(psi);
      ++next;
    }
    if (k == path.grid.n_steps()) break;
    const cplx dq = path.kind == NoiseKind::Real ? cplx{path.increments[k].real(), 0.0}
                                                 : path.increments[k];
    fock::sde_step(psi, dq, path.grid.dt(), path.grid.time(k), params);
  }
  return out;
}

OracleCheck make_check(std::string name, double measured, double tol, bool ok,
                       std::string detail = {}) {
  return {std::move(name), measured, tol, ok ? CheckStatus::Pass : CheckStatus::Fail,
          std::move(detail)};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

bool OracleReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const OracleCheck& c) { return c.status == CheckStatus::Pass; });
}

bool OracleReport::inconclusive() const {
  return std::any_of(checks.begin(), checks.end(),
                     [](const OracleCheck& c) { return c.status == CheckStatus::Inconclusive; });
}

OracleReport oracle_check(const RunConfig& cfg, const OracleOptions& options) {
  cfg.validate();
  if (cfg.rho0 > 2.0 || std::abs(cfg.alpha0) > 2.0)
    throw ConfigError("oracle check requires rho0 <= 2 and |alpha0| <= 2");
  if (options.paths == 0 || options.checkpoints == 0)
    throw ConfigError("oracle check needs at least one path and one checkpoint");

  OracleReport report;
  const TrajectoryRunner runner(cfg);
  const TimeGrid& grid = runner.grid();
  const double dt = grid.dt();
  const double tol = options.tolerance > 0.0 ? options.tolerance : 100.0 * dt;
  const double fidelity_floor = 1.0 - options.fidelity_factor * dt;
  const int cutoff = cfg.cutoff > 0
                         ? cfg.cutoff
                         : std::max(16, fock::choose_cutoff(cfg.xi0(), cfg.alpha0, 1e-14) + 8);
  report.cutoff = cutoff;

  std::vector<std::size_t> snapshots;
  for (std::size_t j = 1; j <= options.checkpoints; ++j)
    snapshots.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(grid.n_steps()) /
                     static_cast<double>(options.checkpoints))));

  // Cutoff gate: doubling the cutoff must not move any reported expectation.
  {
    const NoisePath path = runner.noise(0);
    const auto low = integrate_filter(path, cfg, cutoff, snapshots);
    const auto high = integrate_filter(path, cfg, 2 * cutoff, snapshots);
    double worst = 0.0;
    for (std::size_t j = 0; j < snapshots.size(); ++j)
      worst = std::max(worst, max_abs_diff(observe(low[j]), observe(high[j])));
    OracleCheck gate{"cutoff_gate", worst, 1e-8,
                     worst < 1e-8 ? CheckStatus::Pass : CheckStatus::Inconclusive,
                     "cutoff " + std::to_string(cutoff) + " vs " + std::to_string(2 * cutoff)};
    report.checks.push_back(gate);
  }

  double d_mean_x = 0, d_mean_y = 0, d_dx = 0, d_dy = 0, d_norm2 = 0;
  double min_state_fid = 1.0, min_family_fid = 1.0;
  std::size_t flagged = 0;
  for (std::size_t p = 0; p < options.paths; ++p) {
    const NoisePath path = runner.noise(p);
    const auto analytic = runner.posterior(path);
    const auto states = integrate_filter(path, cfg, cutoff, snapshots);
    for (std::size_t j = 0; j < snapshots.size(); ++j) {
      const Observables o = observe(states[j]);
      const Observables a = observe(analytic[snapshots[j]]);
      d_mean_x = std::max(d_mean_x, std::abs(o.moments.meanX - a.moments.meanX));
      d_mean_y = std::max(d_mean_y, std::abs(o.moments.meanY - a.moments.meanY));
      d_dx = std::max(d_dx, std::abs(o.moments.dX - a.moments.dX));
      d_dy = std::max(d_dy, std::abs(o.moments.dY - a.moments.dY));
      d_norm2 = std::max(d_norm2, std::abs(o.norm2 - a.norm2));
      min_state_fid =
          std::min(min_state_fid, fock::fidelity(assemble(analytic[snapshots[j]], cutoff), states[j]));
      const auto fit = fock::fit_squeezed_coherent(states[j]);
      min_family_fid = std::min(min_family_fid, fit.fidelity);
      if (fit.non_gaussian) ++flagged;
    }
  }
  report.checks.push_back(make_check("mean_x", d_mean_x, tol, d_mean_x < tol));
  report.checks.push_back(make_check("mean_y", d_mean_y, tol, d_mean_y < tol));
  report.checks.push_back(make_check("dx", d_dx, tol, d_dx < tol));
  report.checks.push_back(make_check("dy", d_dy, tol, d_dy < tol));
  report.checks.push_back(make_check("norm2", d_norm2, tol, d_norm2 < tol));
  report.checks.push_back(make_check("state_fidelity", min_state_fid, fidelity_floor,
                                     min_state_fid >= fidelity_floor,
                                     "min over paths/checkpoints of |<analytic|fock>|^2"));
  report.checks.push_back(make_check("family_fidelity", min_family_fid, fidelity_floor,
                                     min_family_fid >= fidelity_floor,
                                     std::to_string(flagged) + " fits flagged non-Gaussian"));

  if (!options.convergence_dts.empty()) {
    std::vector<double> dts = options.convergence_dts;
    std::sort(dts.begin(), dts.end(), std::greater<>());
    const double ref_dt = dts.back() / 8.0;
    RunConfig fine_cfg = cfg;
    fine_cfg.dt = ref_dt;
    const TrajectoryRunner fine_runner(fine_cfg);
    std::vector<double> errors(dts.size(), 0.0);
    for (std::size_t p = 0; p < options.convergence_paths; ++p) {
      const NoisePath fine = fine_runner.noise(p);
      const auto analytic = fine_runner.posterior(fine);
      const fock::FockVector reference = assemble(analytic.back(), cutoff);
      for (std::size_t i = 0; i < dts.size(); ++i) {
        const auto factor = static_cast<std::size_t>(std::llround(dts[i] / ref_dt));
        const NoisePath coarse = coarsen(fine, factor);
        const auto end = integrate_filter(coarse, cfg, cutoff, {coarse.grid.n_steps()});
        errors[i] += (end.front().amplitudes - reference.amplitudes).norm();
      }
    }
    std::vector<double> log_dt, log_err;
    for (std::size_t i = 0; i < dts.size(); ++i) {
      errors[i] /= static_cast<double>(options.convergence_paths);
      log_dt.push_back(std::log2(dts[i]));
      log_err.push_back(std::log2(errors[i]));
    }
    report.convergence_errors = errors;
    report.convergence_slope = dts.size() >= 2 ? fit_slope(log_dt, log_err) : 0.0;
    report.checks.push_back(make_check("strong_convergence_slope", report.convergence_slope,
                                       options.min_slope,
                                       report.convergence_slope >= options.min_slope,
                                       "mean ||psi_EM(T) - psi_analytic(T)|| under dt halving"));
  }
  return report;
}

std::string oracle_report_json(const OracleReport& report) {
  nlohmann::json j;
  j["passed"] = report.passed();
  j["inconclusive"] = report.inconclusive();
  j["cutoff"] = report.cutoff;
  j["convergence_errors"] = report.convergence_errors;
  j["convergence_slope"] = report.convergence_slope;
  auto& checks = j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"tolerance", c.tolerance},
                      {"status", to_string(c.status)},
                      {"detail", c.detail}});
  return j.dump(2);
}

}  // namespace sqf
