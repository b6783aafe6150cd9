#include "sqfilter/noise.hpp"

#include <cmath>
#include <ostream>

#include "sqfilter/csv.hpp"

namespace sqf {

TimeGrid::TimeGrid(double t_max, double dt) : t_max_(t_max), dt_(dt) {
  if (!std::isfinite(t_max) || t_max <= 0.0) throw ConfigError("t_max must be finite and > 0");
  if (!std::isfinite(dt) || dt <= 0.0) throw ConfigError("dt must be finite and > 0");
  const double n = std::round(t_max / dt);
  if (n < 1.0 || std::abs(n * dt - t_max) > 1e-12)
    throw ConfigError("t_max must be an integer multiple of dt");
  n_steps_ = static_cast<std::size_t>(n);
}

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double GaussianStream::uniform() {
  // 53 random bits, shifted into (0, 1]
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double phase = 2.0 * kPi * uniform();
  spare_ = r * std::sin(phase);
  has_spare_ = true;
  return r * std::cos(phase);
}

NoisePath generate_path(const TimeGrid& grid, NoiseKind kind, std::uint64_t seed,
                        std::uint64_t stream) {
  NoisePath path{grid, kind, {}, seed, stream};
  path.increments.resize(grid.n_steps());
  GaussianStream gauss(seed, stream);
  const double sd = std::sqrt(grid.dt());
  if (kind == NoiseKind::Real) {
    for (auto& dq : path.increments) dq = {sd * gauss.next(), 0.0};
  } else {
    const double s = sd / std::sqrt(2.0);
    for (auto& dq : path.increments) {
      const double q1 = gauss.next();
      const double q2 = gauss.next();
      dq = {s * q1, -s * q2};
    }
  }
  return path;
}

NoisePath coarsen(const NoisePath& path, std::size_t factor) {
  if (factor == 0 || path.grid.n_steps() % factor != 0)
    throw ConfigError("coarsening factor must divide the number of steps");
  NoisePath out{TimeGrid(path.grid.t_max(), path.grid.dt() * static_cast<double>(factor)),
                path.kind,
                {},
                path.seed,
                path.stream};
  out.increments.reserve(path.grid.n_steps() / factor);
  for (std::size_t k = 0; k < path.increments.size(); k += factor) {
    cplx sum{0.0, 0.0};
    for (std::size_t j = 0; j < factor; ++j) sum += path.increments[k + j];
    out.increments.push_back(sum);
  }
  return out;
}

cplx ito_integrate(std::span<const cplx> integrand, const NoisePath& path) {
  if (integrand.size() != path.increments.size())
    throw ConfigError("integrand sampling does not match the noise grid");
  cplx sum{0.0, 0.0};
  for (std::size_t k = 0; k < integrand.size(); ++k) sum += integrand[k] * path.increments[k];
  return sum;
}

cplx ito_integrate(const std::function<cplx(double)>& f, const NoisePath& path) {
  cplx sum{0.0, 0.0};
  for (std::size_t k = 0; k < path.increments.size(); ++k)
    sum += f(path.grid.time(k)) * path.increments[k];
  return sum;
}

void write_path_csv(std::ostream& out, const NoisePath& path) {
  out << "k,t_k,re_dQ,im_dQ\n";
  for (std::size_t k = 0; k < path.increments.size(); ++k) {
    out << k << ',' << csv_number(path.grid.time(k)) << ','
        << csv_number(path.increments[k].real()) << ',' << csv_number(path.increments[k].imag())
        << '\n';
  }
}

}  // namespace sqf
