#include "sqfilter/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "sqfilter/csv.hpp"
#include "sqfilter/fock.hpp"
#include "sqfilter/het2.hpp"

namespace sqf {

TrajectoryRunner::TrajectoryRunner(RunConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  grid_ = cfg_.grid();
  if (cfg_.scheme == Scheme::SingleHeterodyne)
    gamma_flow_ = het1::riccati_closed(grid_, cfg_.model(), gamma_from_squeeze(cfg_.xi0()));
}

NoisePath TrajectoryRunner::noise(std::size_t traj_index) const {
  return generate_path(grid_, cfg_.noise_kind(), cfg_.seed, traj_index);
}

std::vector<PosteriorFrame> TrajectoryRunner::posterior(const NoisePath& path) const {
  if (cfg_.scheme == Scheme::DoubleHeterodyne)
    return het2::solve(path, cfg_.model(), cfg_.xi0(), cfg_.alpha0).frames;
  if (!(path.grid == grid_)) {
    const auto flow = het1::riccati_closed(path.grid, cfg_.model(), gamma_from_squeeze(cfg_.xi0()));
    return het1::solve(path, cfg_.model(), flow, cfg_.alpha0).frames;
  }
  auto frames = het1::solve(path, cfg_.model(), *gamma_flow_, cfg_.alpha0).frames;
  frames.front().record.squeeze = cfg_.xi0();
  return frames;
}

std::vector<PosteriorFrame> TrajectoryRunner::posterior(std::size_t traj_index) const {
  try {
    return posterior(noise(traj_index));
  } catch (const NumericError& e) {
    throw NumericError("trajectory " + std::to_string(traj_index) + ": " + e.what());
  }
}

std::vector<TrajectoryFrame> TrajectoryRunner::run(std::size_t traj_index) const {
  const NoisePath path = noise(traj_index);
  std::vector<PosteriorFrame> posterior_frames;
  try {
    posterior_frames = posterior(path);
  } catch (const NumericError& e) {
    throw NumericError("trajectory " + std::to_string(traj_index) + ": " + e.what());
  }
  std::vector<TrajectoryFrame> frames;
  frames.reserve(posterior_frames.size());
  for (std::size_t k = 0; k < posterior_frames.size(); ++k) {
    const PosteriorFrame& p = posterior_frames[k];
    TrajectoryFrame f;
    f.t = p.t;
    f.dQ = k == 0 ? cplx{0.0, 0.0} : path.increments[k - 1];
    f.alpha = p.record.alpha;
    f.rho = p.record.squeeze.rho();
    f.theta = p.record.squeeze.wrapped_theta();
    f.moments = p.moments;
    f.l = p.record.l;
    f.norm2 = std::norm(p.record.l);
    if (!(f.norm2 > 0.0) || !std::isfinite(f.norm2) ||
        f.moments.dX * f.moments.dY < 0.25 - 1e-12)
      throw NumericError("trajectory " + std::to_string(traj_index) + ": frame invariant violated at t=" +
                         csv_number(f.t));
    frames.push_back(f);
  }
  return frames;
}

std::vector<TrajectoryFrame> run_trajectory(const RunConfig& cfg, std::size_t traj_index) {
  return TrajectoryRunner(cfg).run(traj_index);
}

std::vector<std::size_t> output_indices(const RunConfig& cfg) {
  const std::size_t n = cfg.grid().n_steps();
  std::vector<std::size_t> idx;
  if (cfg.full_resolution || n + 1 <= cfg.frames) {
    idx.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) idx[k] = k;
    return idx;
  }
  idx.reserve(cfg.frames);
  for (std::size_t i = 0; i < cfg.frames; ++i)
    idx.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(i) *
                                                        static_cast<double>(n) /
                                                        static_cast<double>(cfg.frames - 1))));
  return idx;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryFrame>& frames,
                          const std::vector<std::size_t>& indices) {
  out << "t,re_dQ,im_dQ,re_alpha,im_alpha,rho,theta,meanX,meanY,dX,dY,re_l,im_l,norm2\n";
  for (const std::size_t k : indices) {
    const TrajectoryFrame& f = frames.at(k);
    const double row[] = {f.t,          f.dQ.real(),      f.dQ.imag(),      f.alpha.real(),
                          f.alpha.imag(), f.rho,          f.theta,          f.moments.meanX,
                          f.moments.meanY, f.moments.dX,  f.moments.dY,     f.l.real(),
                          f.l.imag(),   f.norm2};
    bool first = true;
    for (const double v : row) {
      if (!first) out << ',';
      out << csv_number(v);
      first = false;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

namespace {

constexpr std::size_t kChunk = 32;

struct CheckpointSums {
  double norm2 = 0.0;
  double norm2_sq = 0.0;
  cplx a{0.0, 0.0};
  double a_re_sq = 0.0;
  double a_im_sq = 0.0;
  cplx weighted_a{0.0, 0.0};

  void add(const CheckpointSums& o) {
    norm2 += o.norm2;
    norm2_sq += o.norm2_sq;
    a += o.a;
    a_re_sq += o.a_re_sq;
    a_im_sq += o.a_im_sq;
    weighted_a += o.weighted_a;
  }
};

struct ChunkResult {
  std::size_t completed = 0;
  std::vector<CheckpointSums> sums;
  std::vector<fock::Matrix> density;
  std::vector<TrajectoryFailure> failures;
};

double standard_error(double sum, double sum_sq, std::size_t m) {
  if (m < 2) return 0.0;
  const double dm = static_cast<double>(m);
  const double var = std::max(0.0, (sum_sq - sum * sum / dm) / (dm - 1.0));
  return std::sqrt(var / dm);
}

}  // namespace

EnsembleStats run_ensemble(const RunConfig& cfg, const EnsembleOptions& options) {
  const TrajectoryRunner runner(cfg);
  const TimeGrid& grid = runner.grid();
  const std::vector<std::size_t> checkpoints =
      options.checkpoints.empty() ? output_indices(cfg) : options.checkpoints;
  for (const std::size_t k : checkpoints)
    if (k > grid.n_steps()) throw ConfigError("ensemble checkpoint outside the grid");

  std::vector<std::size_t> density_idx;
  for (const double t : options.density_times) {
    const double k = std::round(t / grid.dt());
    if (k < 0.0 || k > static_cast<double>(grid.n_steps()) || std::abs(k * grid.dt() - t) > 1e-9)
      throw ConfigError("density time " + csv_number(t) + " is not a grid point");
    density_idx.push_back(static_cast<std::size_t>(k));
  }
  int cutoff = 0;
  if (!density_idx.empty()) {
    cutoff = options.cutoff > 0 ? options.cutoff
                                : fock::choose_cutoff(cfg.xi0(), cfg.alpha0, 1e-12) + 16;
  }

  const std::size_t m = cfg.trajectories;
  const std::size_t n_chunks = (m + kChunk - 1) / kChunk;
  std::vector<ChunkResult> chunks(n_chunks);
  parallel_for(n_chunks, cfg.threads, [&](std::size_t c) {
    ChunkResult& res = chunks[c];
    res.sums.assign(checkpoints.size(), {});
    res.density.assign(density_idx.size(), fock::Matrix::Zero(cutoff + 1, cutoff + 1));
    for (std::size_t i = c * kChunk; i < std::min(m, (c + 1) * kChunk); ++i) {
      try {
        const auto frames = runner.posterior(i);
        std::vector<CheckpointSums> local(checkpoints.size());
        for (std::size_t j = 0; j < checkpoints.size(); ++j) {
          const PosteriorFrame& f = frames[checkpoints[j]];
          const double n2 = std::norm(f.record.l);
          const cplx a{f.moments.meanX, f.moments.meanY};
          local[j] = {n2, n2 * n2, a, a.real() * a.real(), a.imag() * a.imag(), n2 * a};
        }
        std::vector<fock::Matrix> local_density;
        for (const std::size_t k : density_idx) {
          const PosteriorFrame& f = frames[k];
          fock::FockVector psi = fock::build_squeezed_coherent(
              f.record.squeeze, f.record.alpha, cutoff, fock::SqueezeConstruction::NormalOrdered,
              1e-8);
          psi.amplitudes *= f.record.l;
          local_density.push_back(psi.amplitudes * psi.amplitudes.adjoint());
        }
        for (std::size_t j = 0; j < checkpoints.size(); ++j) res.sums[j].add(local[j]);
        for (std::size_t j = 0; j < density_idx.size(); ++j) res.density[j] += local_density[j];
        ++res.completed;
      } catch (const Error& e) {
        res.failures.push_back({i, e.what()});
      }
    }
  });

  EnsembleStats stats;
  stats.requested = m;
  stats.cutoff = cutoff;
  std::vector<CheckpointSums> total(checkpoints.size());
  std::vector<fock::Matrix> density(density_idx.size(),
                                    fock::Matrix::Zero(cutoff + 1, cutoff + 1));
  for (const ChunkResult& res : chunks) {
    stats.completed += res.completed;
    for (std::size_t j = 0; j < checkpoints.size(); ++j) total[j].add(res.sums[j]);
    for (std::size_t j = 0; j < density_idx.size(); ++j) density[j] += res.density[j];
    stats.failures.insert(stats.failures.end(), res.failures.begin(), res.failures.end());
  }
  if (stats.failures.size() * 100 > m)
    throw NumericError("ensemble aborted: " + std::to_string(stats.failures.size()) + " of " +
                       std::to_string(m) + " trajectories failed (first: " +
                       stats.failures.front().message + ")");
  if (stats.completed == 0) throw NumericError("ensemble produced no trajectories");

  const double dm = static_cast<double>(stats.completed);
  for (std::size_t j = 0; j < checkpoints.size(); ++j) {
    const CheckpointSums& s = total[j];
    EnsembleCheckpoint cp;
    cp.t = grid.time(checkpoints[j]);
    cp.mean_norm2 = s.norm2 / dm;
    cp.stderr_norm2 = standard_error(s.norm2, s.norm2_sq, stats.completed);
    cp.mean_a = s.a / dm;
    cp.stderr_a = {standard_error(s.a.real(), s.a_re_sq, stats.completed),
                   standard_error(s.a.imag(), s.a_im_sq, stats.completed)};
    cp.weighted_mean_a = s.weighted_a / dm;
    stats.checkpoints.push_back(cp);
  }

  if (!density_idx.empty()) {
    const ModelParams params = cfg.model();
    fock::DensityMatrix rho = fock::projector(fock::build_squeezed_coherent(
        cfg.xi0(), cfg.alpha0, cutoff, fock::SqueezeConstruction::NormalOrdered, 1e-10));
    const double rate = (params.omega + params.mu) * static_cast<double>(cutoff);
    const auto sub = static_cast<std::size_t>(std::ceil(grid.dt() * rate / 0.1));
    const double h = grid.dt() / static_cast<double>(sub);
    std::size_t at = 0;
    std::vector<std::size_t> order(density_idx.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return density_idx[x] < density_idx[y]; });
    stats.density.resize(density_idx.size());
    for (const std::size_t j : order) {
      const std::size_t target = density_idx[j];
      for (; at < target; ++at)
        for (std::size_t s = 0; s < sub; ++s) lindblad_step(rho, h, params, false);
      rho.validate(1e-6);
      stats.density[j] = {grid.time(target), fock::trace_distance(density[j] / dm, rho.entries)};
    }
  }
  return stats;
}

void write_ensemble_csv(std::ostream& out, const EnsembleStats& stats) {
  out << "t,mean_norm2,stderr_norm2,re_mean_a,im_mean_a,re_stderr_a,im_stderr_a,"
         "re_weighted_a,im_weighted_a\n";
  for (const auto& cp : stats.checkpoints) {
    out << csv_number(cp.t) << ',' << csv_number(cp.mean_norm2) << ','
        << csv_number(cp.stderr_norm2) << ',' << csv_number(cp.mean_a.real()) << ','
        << csv_number(cp.mean_a.imag()) << ',' << csv_number(cp.stderr_a.real()) << ','
        << csv_number(cp.stderr_a.imag()) << ',' << csv_number(cp.weighted_mean_a.real()) << ','
        << csv_number(cp.weighted_mean_a.imag()) << '\n';
  }
}

// ---------------------------------------------------------------------------

FigureRow figure_point(const FigureSpec& spec, double tau) {
  const double t = tau / spec.omega;
  if (spec.which == Figure::DoubleHeterodyne) {
    const ModelParams params{spec.omega, spec.mu, 0.0, spec.vartheta, Scheme::DoubleHeterodyne};
    const auto [dX, dY] = het2::uncertainties(t, params, spec.rho0, spec.theta0);
    return {tau, dX, dY};
  }
  const ModelParams params{spec.omega, spec.mu, kPi / 2.0, spec.vartheta,
                           Scheme::SingleHeterodyne};
  const GammaParam g0 = gamma_from_squeeze(SqueezeParam(spec.rho0, spec.theta0));
  const auto [dX, dY] = het1::uncertainties_single(het1::gamma_closed_linear_phase(t, params, g0));
  return {tau, dX, dY};
}

std::vector<FigureRow> figure_data(const FigureSpec& spec) {
  if (spec.samples < 2) throw ConfigError("figure needs at least two samples");
  if (!(spec.tau_max > 0.0)) throw ConfigError("tau_max must be > 0");
  ModelParams{spec.omega, spec.mu, 0.0, spec.vartheta, Scheme::DoubleHeterodyne}.validate();
  (void)SqueezeParam(spec.rho0, spec.theta0);
  std::vector<FigureRow> rows;
  rows.reserve(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const double tau =
        spec.tau_max * static_cast<double>(i) / static_cast<double>(spec.samples - 1);
    rows.push_back(figure_point(spec, tau));
  }
  return rows;
}

void write_figure_csv(std::ostream& out, const std::vector<FigureRow>& rows) {
  out << "tau,dX,dY\n";
  for (const auto& r : rows)
    out << csv_number(r.tau) << ',' << csv_number(r.dX) << ',' << csv_number(r.dY) << '\n';
}

}  // namespace sqf
