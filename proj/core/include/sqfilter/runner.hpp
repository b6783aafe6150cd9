#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sqfilter/config.hpp"
#include "sqfilter/het1.hpp"
#include "sqfilter/noise.hpp"

namespace sqf {

/// One output row of a posterior trajectory. dQ is the increment consumed
/// to reach t (zero at t = 0); theta is wrapped to (-pi, pi].
struct TrajectoryFrame {
  double t = 0.0;
  cplx dQ{0.0, 0.0};
  cplx alpha{0.0, 0.0};
  double rho = 0.0;
  double theta = 0.0;
  QuadratureMoments moments;
  cplx l{1.0, 0.0};
  double norm2 = 1.0;
};

/// Runs trajectories of one configuration. The Gamma flow of single
/// heterodyne detection is noise independent and computed once.
class TrajectoryRunner {
 public:
  explicit TrajectoryRunner(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const TimeGrid& grid() const { return grid_; }

  NoisePath noise(std::size_t traj_index) const;

  /// Posterior frames at every grid point for (cfg.seed, traj_index).
  /// Numeric failures are rethrown as NumericError naming the trajectory.
  std::vector<PosteriorFrame> posterior(std::size_t traj_index) const;
  std::vector<PosteriorFrame> posterior(const NoisePath& path) const;

  std::vector<TrajectoryFrame> run(std::size_t traj_index) const;

 private:
  RunConfig cfg_;
  TimeGrid grid_;
  std::optional<het1::RiccatiSolution> gamma_flow_;
};

/// Frames at every grid point, checked against the TrajectoryFrame
/// invariants (norm2 > 0, dX dY >= 1/4 - 1e-12).
std::vector<TrajectoryFrame> run_trajectory(const RunConfig& cfg, std::size_t traj_index);

/// Indices kept for output: all when full_resolution or the grid is short,
/// otherwise cfg.frames evenly spread indices including both ends.
std::vector<std::size_t> output_indices(const RunConfig& cfg);

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryFrame>& frames,
                          const std::vector<std::size_t>& indices);

// ---------------------------------------------------------------------------

/// Calls fn(i) for i in [0, n) on a pool of `threads` workers (0 = hardware
/// concurrency). The first exception thrown by any call is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct EnsembleOptions {
  /// Grid indices at which statistics are collected; empty = output_indices.
  std::vector<std::size_t> checkpoints;
  /// Times at which the averaged unnormalised projector is compared with the
  /// Lindblad solution; empty disables the density comparison.
  std::vector<double> density_times;
  int cutoff = 0;  // Fock cutoff for density work; 0 = automatic
};

struct EnsembleCheckpoint {
  double t = 0.0;
  double mean_norm2 = 0.0;
  double stderr_norm2 = 0.0;
  cplx mean_a{0.0, 0.0};          // plain average of the posterior <a>
  cplx stderr_a{0.0, 0.0};        // componentwise standard errors
  cplx weighted_mean_a{0.0, 0.0}; // |l|^2-weighted (physical) average
};

struct DensityComparison {
  double t = 0.0;
  double trace_distance = 0.0;
};

struct TrajectoryFailure {
  std::size_t index = 0;
  std::string message;
};

struct EnsembleStats {
  std::size_t requested = 0;
  std::size_t completed = 0;
  std::vector<EnsembleCheckpoint> checkpoints;
  std::vector<DensityComparison> density;
  std::vector<TrajectoryFailure> failures;
  int cutoff = 0;
};

/// Fans trajectories out to a worker pool and reduces them in index order,
/// so results are bitwise independent of the thread count. Failed
/// trajectories are recorded and skipped; more than 1% failures throws
/// NumericError.
EnsembleStats run_ensemble(const RunConfig& cfg, const EnsembleOptions& options = {});

void write_ensemble_csv(std::ostream& out, const EnsembleStats& stats);

// ---------------------------------------------------------------------------

enum class Figure { DoubleHeterodyne = 1, SingleHeterodyne = 2 };

struct FigureSpec {
  Figure which = Figure::DoubleHeterodyne;
  double rho0 = 0.5;
  double omega = 1.0;
  double mu = 0.01;
  double theta0 = 0.0;
  double vartheta = 0.05;
  double tau_max = 100.0;
  std::size_t samples = 10000;
};

struct FigureRow {
  double tau = 0.0;
  double dX = 0.5;
  double dY = 0.5;
};

/// Uncertainty curves against tau = omega t on `samples` evenly spaced
/// points of [0, tau_max]. Figure 1 uses the double-heterodyne closed form;
/// figure 2 the single-heterodyne Riccati flow with phi(t) = pi/2 +
/// vartheta t.
std::vector<FigureRow> figure_data(const FigureSpec& spec);
FigureRow figure_point(const FigureSpec& spec, double tau);

void write_figure_csv(std::ostream& out, const std::vector<FigureRow>& rows);

// ---------------------------------------------------------------------------

enum class CheckStatus { Pass, Fail, Inconclusive };
std::string to_string(CheckStatus s);

struct OracleCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct OracleOptions {
  std::size_t paths = 20;
  std::size_t checkpoints = 20;
  /// Moment and |l|^2 tolerance; <= 0 means 100 dt (1e-2 at dt = 1e-4).
  double tolerance = 0.0;
  /// Family-fidelity floor is 1 - fidelity_factor * dt.
  double fidelity_factor = 50.0;
  /// Step sizes of the strong-convergence study (finest last); empty skips it.
  std::vector<double> convergence_dts{1e-3, 5e-4, 2.5e-4};
  std::size_t convergence_paths = 20;
  double min_slope = 0.45;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  int cutoff = 0;
  std::vector<double> convergence_errors;
  double convergence_slope = 0.0;

  bool passed() const;
  bool inconclusive() const;
};

/// Compares the closed-form posterior with Euler-Maruyama integration of
/// the linear filter in a truncated Fock space on shared noise paths, then
/// runs a dt-halving strong-convergence study. Requires rho0 <= 2 and
/// |alpha0| <= 2. A failed cutoff gate makes the report inconclusive.
OracleReport oracle_check(const RunConfig& cfg, const OracleOptions& options = {});

std::string oracle_report_json(const OracleReport& report);

}  // namespace sqf
