#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "sqfilter/core.hpp"

namespace sqf {

/// Uniform grid t_k = k dt, k = 0..n_steps.
class TimeGrid {
 public:
  TimeGrid() = default;
  /// Throws ConfigError unless t_max > 0, dt > 0 and t_max is an integer
  /// multiple of dt (to 1e-12).
  TimeGrid(double t_max, double dt);

  double t_max() const { return t_max_; }
  double dt() const { return dt_; }
  std::size_t n_steps() const { return n_steps_; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt_; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t_max_ = 1.0;
  double dt_ = 1.0;
  std::size_t n_steps_ = 1;
};

enum class NoiseKind { Real, Complex };

/// Standard normal variates from a 64-bit Mersenne twister keyed by
/// (seed, stream) through std::seed_seq. The normal transform is a local
/// Box-Muller so the sequence does not depend on the standard library's
/// distribution implementation.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream);
  double next();

 private:
  double uniform();  // (0, 1]

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Discretised Wiener record. Real kind: increments ~ N(0, dt). Complex
/// kind: (dq1 - i dq2)/sqrt(2) with independent dq1, dq2 ~ N(0, dt), so
/// E|dQ|^2 = dt and E dQ^2 = 0.
struct NoisePath {
  TimeGrid grid;
  NoiseKind kind = NoiseKind::Real;
  std::vector<cplx> increments;  // increments[k] spans [t_k, t_{k+1})
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

NoisePath generate_path(const TimeGrid& grid, NoiseKind kind, std::uint64_t seed,
                        std::uint64_t stream = 0);

/// Sums consecutive groups of `factor` increments: the same Brownian path
/// seen on a grid with step factor * dt.
NoisePath coarsen(const NoisePath& path, std::size_t factor);

/// Left-endpoint Ito sum  sum_k f(t_k) dQ_k. `integrand` holds f at t_0 ..
/// t_{n-1}; any other length is a grid mismatch (ConfigError).
cplx ito_integrate(std::span<const cplx> integrand, const NoisePath& path);
cplx ito_integrate(const std::function<cplx(double)>& f, const NoisePath& path);

/// CSV with header k,t_k,re_dQ,im_dQ.
void write_path_csv(std::ostream& out, const NoisePath& path);

}  // namespace sqf
