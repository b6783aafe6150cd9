#include "sqfilter/het2.hpp"

#include <cmath>

namespace sqf::het2 {
namespace {

// 1 - tanh(rho0)
double initial_complement(double rho0) {
  const double e = std::exp(-2.0 * rho0);
  return 2.0 * e / (1.0 + e);
}

struct DiskPoint {
  double magnitude;   // e^{-mu t} tanh rho0
  double complement;  // 1 - magnitude
  double theta;       // theta0 - 2 omega t, unwrapped
  double one_minus_abs2() const { return complement * (2.0 - complement); }
};

DiskPoint disk_point(double t, const ModelParams& params, double rho0, double theta0) {
  const double decay = std::exp(-params.mu * t);
  return {decay * std::tanh(rho0), -std::expm1(-params.mu * t) + decay * initial_complement(rho0),
          theta0 - 2.0 * params.omega * t};
}

void require_complex(const NoisePath& path) {
  if (path.kind != NoiseKind::Complex)
    throw ConfigError("double heterodyne requires a complex noise record");
}

}  // namespace

GammaParam gamma_at(double t, const ModelParams& params, const SqueezeParam& xi0) {
  const DiskPoint p = disk_point(t, params, xi0.rho(), xi0.theta());
  return GammaParam(std::polar(p.magnitude, p.theta), p.complement);
}

SqueezeParam squeeze_at(double t, const ModelParams& params, const SqueezeParam& xi0) {
  if (t == 0.0) return xi0;
  const DiskPoint p = disk_point(t, params, xi0.rho(), xi0.theta());
  return SqueezeParam(0.5 * std::log1p(2.0 * p.magnitude / p.complement), p.theta);
}

double c_factor(double t, const ModelParams& params, double rho0) {
  const double s = std::exp(-params.mu * t) * std::tanh(rho0);
  return 2.0 * s / (1.0 - s * s);
}

std::pair<double, double> uncertainties(double t, const ModelParams& params, double rho0,
                                        double theta0) {
  const DiskPoint p = disk_point(t, params, rho0, theta0);
  return quadrature_uncertainties(p.complement, p.theta);
}

SqueezeRegion squeeze_region(double t, const ModelParams& params, double rho0, double theta0) {
  if (rho0 <= 0.0) return SqueezeRegion::None;
  const double bound = std::exp(-params.mu * t) * std::tanh(rho0);
  const double c = std::cos(theta0 - 2.0 * params.omega * t);
  if (c > bound) return SqueezeRegion::XSqueezed;
  if (c < -bound) return SqueezeRegion::YSqueezed;
  return SqueezeRegion::None;
}

std::vector<cplx> alpha_trajectory(const NoisePath& path, const ModelParams& params,
                                   const SqueezeParam& xi0, cplx alpha0) {
  require_complex(path);
  const TimeGrid& grid = path.grid;
  const cplx rate{params.mu / 2.0, params.omega};  // i omega + mu/2
  const double d0 = disk_point(0.0, params, xi0.rho(), xi0.theta()).one_minus_abs2();
  // sqrt(mu) e^{i theta0} sinh rho0
  const cplx kick = std::sqrt(params.mu) * std::polar(std::sinh(xi0.rho()), xi0.theta());

  std::vector<cplx> alphas(grid.n_steps() + 1);
  cplx integral{0.0, 0.0};
  for (std::size_t k = 0; k <= grid.n_steps(); ++k) {
    const double t = grid.time(k);
    const double dk = disk_point(t, params, xi0.rho(), xi0.theta()).one_minus_abs2();
    alphas[k] = std::exp(-rate * t) * std::sqrt(d0 / dk) * (alpha0 - kick * integral);
    require_finite(alphas[k], "double-heterodyne alpha");
    if (k < grid.n_steps())
      integral += std::exp(-rate * t - kI * params.phase(t)) * path.increments[k];
  }
  return alphas;
}

std::vector<cplx> l_trajectory(const NoisePath& path, const ModelParams& params,
                               const SqueezeParam& xi0, cplx alpha0,
                               std::span<const cplx> alphas) {
  require_complex(path);
  const TimeGrid& grid = path.grid;
  if (alphas.size() != grid.n_steps() + 1)
    throw ConfigError("alpha trajectory does not match the noise grid");
  const double sqrt_mu = std::sqrt(params.mu);
  const double d0 = disk_point(0.0, params, xi0.rho(), xi0.theta()).one_minus_abs2();
  const double a0 = std::norm(alpha0);

  std::vector<cplx> ls(grid.n_steps() + 1);
  cplx chi{0.0, 0.0};
  for (std::size_t k = 0; k <= grid.n_steps(); ++k) {
    const double t = grid.time(k);
    const DiskPoint p = disk_point(t, params, xi0.rho(), xi0.theta());
    const double dk = p.one_minus_abs2();
    // sqrt(cosh rho(t) / cosh rho0) = (d0/dk)^{1/4}
    const cplx log_l =
        0.25 * std::log(d0 / dk) - kI * (params.omega * t / 2.0) +
        0.5 * (std::norm(alphas[k]) - a0) + chi;
    ls[k] = std::exp(log_l);
    require_finite(ls[k], "double-heterodyne l");
    if (k < grid.n_steps()) {
      const double cosh_rho = 1.0 / std::sqrt(dk);
      const double sinh_cosh = p.magnitude / dk;
      chi += sqrt_mu * alphas[k] * cosh_rho * std::polar(1.0, -params.phase(t)) *
                 path.increments[k] +
             params.mu * std::polar(sinh_cosh, -p.theta) * alphas[k] * alphas[k] * grid.dt();
    }
  }
  return ls;
}

Het2Solution solve(const NoisePath& path, const ModelParams& params, const SqueezeParam& xi0,
                   cplx alpha0) {
  params.validate();
  const std::vector<cplx> alphas = alpha_trajectory(path, params, xi0, alpha0);
  const std::vector<cplx> ls = l_trajectory(path, params, xi0, alpha0, alphas);
  Het2Solution sol{params, xi0, alpha0, {}};
  sol.frames.reserve(alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const double t = path.grid.time(k);
    PosteriorFrame f;
    f.t = t;
    f.record = {ls[k], squeeze_at(t, params, xi0), alphas[k]};
    f.moments = moments_from_record(f.record);
    sol.frames.push_back(f);
  }
  return sol;
}

}  // namespace sqf::het2
