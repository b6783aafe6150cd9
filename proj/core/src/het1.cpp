#include "sqfilter/het1.hpp"

#include <algorithm>
#include <cmath>

namespace sqf::het1 {
namespace {

// (1 - e^{-z t}) / z, continuous at z t -> 0.
cplx one_minus_exp_over(cplx z, double t) {
  const cplx x = z * t;
  if (std::abs(x) < 1e-4) return t * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
  return (1.0 - std::exp(-x)) / z;
}

GammaParam checked_gamma(cplx value) {
  require_finite(value, "Riccati flow");
  const double complement = 1.0 - std::abs(value);
  if (!(complement > 0.0)) throw NumericError("Riccati flow left the unit disk");
  return GammaParam(value, complement);
}

cplx riccati_rhs(double t, cplx g, const ModelParams& p) {
  const cplx decay{p.mu, 2.0 * p.omega};  // 2 i omega + mu
  return -decay * g + p.mu * std::polar(1.0, -2.0 * p.phase(t)) * g * g;
}

void require_same_grid(const NoisePath& path, const RiccatiSolution& sol) {
  if (!(path.grid == sol.grid) || sol.samples.size() != path.grid.n_steps() + 1)
    throw ConfigError("Gamma flow and noise record use different grids");
}

}  // namespace

GammaParam gamma_closed_general(double t, const ModelParams& params, const GammaParam& gamma0) {
  if (t == 0.0) return gamma0;
  const cplx g0 = gamma0.value();
  const cplx decay{params.mu, 2.0 * params.omega};
  const cplx lambda{params.mu, 2.0 * (params.omega + params.vartheta)};
  const cplx integral = std::polar(1.0, -2.0 * params.phi0) * one_minus_exp_over(lambda, t);
  const cplx denom = 1.0 - params.mu * g0 * integral;
  if (std::abs(denom) < kSingularityThreshold)
    throw SingularityError("Riccati closed form: vanishing denominator");
  return checked_gamma(g0 * std::exp(-decay * t) / denom);
}

GammaParam gamma_closed_linear_phase(double t, const ModelParams& params,
                                     const GammaParam& gamma0) {
  if (std::abs(params.phi0 - kPi / 2.0) > 1e-12)
    throw ConfigError("linear-phase closed form requires phi0 = pi/2");
  if (t == 0.0) return gamma0;
  // e^{(2 i omega + mu) t} overflows past mu t ~ 700
  if (params.mu * t > 600.0) return gamma_closed_general(t, params, gamma0);
  const cplx g0 = gamma0.value();
  const cplx growth{params.mu, 2.0 * params.omega};
  const cplx lambda{params.mu, 2.0 * (params.omega + params.vartheta)};
  // e^{(2i omega + mu) t} [2i(omega + vartheta) + mu (1 + G0)] - mu G0 e^{-2i vartheta t}
  const cplx bracket{params.mu * (1.0 + g0.real()), 2.0 * (params.omega + params.vartheta) +
                                                        params.mu * g0.imag()};
  const cplx denom = std::exp(growth * t) * bracket -
                     std::polar(params.mu, -2.0 * params.vartheta * t) * g0;
  if (std::abs(denom) < kSingularityThreshold * std::abs(lambda))
    throw SingularityError("Riccati linear-phase closed form: vanishing denominator");
  return checked_gamma(lambda * g0 / denom);
}

RiccatiSolution riccati_closed(const TimeGrid& grid, const ModelParams& params,
                               const GammaParam& gamma0) {
  params.validate();
  RiccatiSolution sol{params, gamma0, grid, {}};
  sol.samples.reserve(grid.n_steps() + 1);
  for (std::size_t k = 0; k <= grid.n_steps(); ++k) {
    const double t = grid.time(k);
    sol.samples.push_back({t, gamma_closed_general(t, params, gamma0)});
  }
  return sol;
}

RiccatiSolution riccati_integrate(const TimeGrid& grid, const ModelParams& params,
                                  const GammaParam& gamma0, std::size_t substeps) {
  params.validate();
  if (substeps == 0) throw ConfigError("substeps must be >= 1");
  RiccatiSolution sol{params, gamma0, grid, {}};
  sol.samples.reserve(grid.n_steps() + 1);
  sol.samples.push_back({0.0, gamma0});
  const double h = grid.dt() / static_cast<double>(substeps);
  cplx g = gamma0.value();
  for (std::size_t k = 0; k < grid.n_steps(); ++k) {
    const double t0 = grid.time(k);
    for (std::size_t j = 0; j < substeps; ++j) {
      const double t = t0 + static_cast<double>(j) * h;
      const cplx k1 = riccati_rhs(t, g, params);
      const cplx k2 = riccati_rhs(t + h / 2.0, g + h / 2.0 * k1, params);
      const cplx k3 = riccati_rhs(t + h / 2.0, g + h / 2.0 * k2, params);
      const cplx k4 = riccati_rhs(t + h, g + h * k3, params);
      g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    sol.samples.push_back({grid.time(k + 1), checked_gamma(g)});
  }
  return sol;
}

RiccatiSolution riccati_integrate_converged(const TimeGrid& grid, const ModelParams& params,
                                            const GammaParam& gamma0, double tol) {
  // Start inside the RK4 stability region of the linear part.
  const double rate = 2.0 * params.omega + params.mu + 2.0 * std::abs(params.vartheta);
  std::size_t start = 1;
  while (grid.dt() / static_cast<double>(start) * rate > 0.5) start *= 2;
  RiccatiSolution coarse = riccati_integrate(grid, params, gamma0, start);
  for (std::size_t substeps = 2 * start; substeps <= 4096 * start; substeps *= 2) {
    RiccatiSolution fine = riccati_integrate(grid, params, gamma0, substeps);
    double worst = 0.0;
    for (std::size_t k = 0; k < fine.samples.size(); ++k) {
      const cplx a = coarse.samples[k].gamma.value();
      const cplx b = fine.samples[k].gamma.value();
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
    }
    if (worst < tol) return fine;
    coarse = std::move(fine);
  }
  throw NumericError("RK4 step doubling did not converge");
}

std::pair<double, double> uncertainties_single(const GammaParam& g) {
  return quadrature_uncertainties(g);
}

std::vector<cplx> alpha_trajectory_single(const NoisePath& path, const ModelParams& params,
                                          const RiccatiSolution& gamma_solution, cplx alpha0) {
  if (path.kind != NoiseKind::Real)
    throw ConfigError("single heterodyne requires a real noise record");
  require_same_grid(path, gamma_solution);
  const TimeGrid& grid = path.grid;
  const double dt = grid.dt();
  const double sqrt_mu = std::sqrt(params.mu);
  const cplx rate{params.mu / 2.0, params.omega};  // i omega + mu/2
  const auto& samples = gamma_solution.samples;
  auto rotated = [&](std::size_t k) {  // e^{-2 i phi} Gamma
    return std::polar(1.0, -2.0 * params.phase(samples[k].t)) * samples[k].gamma.value();
  };

  // alpha sqrt(1-|G|^2) = e^{-rate t + mu F(t)} [alpha0 sqrt(1-|G0|^2) - sqrt(mu) S(t)],
  // F = int_0^t e^{-2i phi} G (trapezoid), S = sum_s e^{rate s - mu F(s)} e^{-i phi} G dQ.
  const cplx start = alpha0 * std::sqrt(samples[0].gamma.one_minus_abs2());
  std::vector<cplx> alphas(grid.n_steps() + 1);
  cplx running_f{0.0, 0.0};
  cplx stochastic{0.0, 0.0};
  for (std::size_t k = 0; k <= grid.n_steps(); ++k) {
    const double t = grid.time(k);
    const GammaParam& g = samples[k].gamma;
    const cplx exponent = -rate * t + params.mu * running_f;
    alphas[k] = std::exp(exponent) * (start - sqrt_mu * stochastic) /
                std::sqrt(g.one_minus_abs2());
    require_finite(alphas[k], "single-heterodyne alpha");
    if (k < grid.n_steps()) {
      stochastic += std::exp(-exponent - kI * params.phase(t)) * g.value() *
                    path.increments[k].real();
      running_f += 0.5 * dt * (rotated(k) + rotated(k + 1));
    }
  }
  return alphas;
}

std::vector<cplx> l_trajectory_single(const NoisePath& path, const ModelParams& params,
                                      const RiccatiSolution& gamma_solution,
                                      std::span<const cplx> alphas) {
  if (path.kind != NoiseKind::Real)
    throw ConfigError("single heterodyne requires a real noise record");
  require_same_grid(path, gamma_solution);
  const TimeGrid& grid = path.grid;
  if (alphas.size() != grid.n_steps() + 1)
    throw ConfigError("alpha trajectory does not match the noise grid");
  const double dt = grid.dt();
  const double mu = params.mu;
  const double sqrt_mu = std::sqrt(mu);
  const auto& samples = gamma_solution.samples;

  // Gamma-only part of the three time integrals (trapezoid).
  auto gamma_term = [&](std::size_t k) {
    const cplx g = samples[k].gamma.value();
    const double d = samples[k].gamma.one_minus_abs2();
    const double g2 = std::norm(g);
    const cplx e = std::polar(1.0, -2.0 * params.phase(samples[k].t));
    return (-mu * g2 / 2.0 - mu / 4.0 * e * g2 * g + mu / 4.0 * std::conj(e) *
                                                          std::conj(g) * std::conj(g) * g) /
           d;
  };
  // Coefficient of alpha^2 in the same integrals (left endpoint).
  auto alpha2_coeff = [&](std::size_t k) {
    const cplx g = samples[k].gamma.value();
    const double d = samples[k].gamma.one_minus_abs2();
    const cplx e = std::polar(1.0, -2.0 * params.phase(samples[k].t));
    return (mu * std::conj(g) - mu / 2.0 * e - mu / 2.0 * std::conj(e) * std::conj(g) *
                                                   std::conj(g)) /
           d;
  };

  const double a0 = std::norm(alphas[0]);
  std::vector<cplx> ls(grid.n_steps() + 1);
  cplx integrals{0.0, 0.0};
  for (std::size_t k = 0; k <= grid.n_steps(); ++k) {
    const double t = grid.time(k);
    const cplx log_l = -kI * (params.omega * t / 2.0) + 0.5 * (std::norm(alphas[k]) - a0) +
                       integrals;
    ls[k] = std::exp(log_l);
    require_finite(ls[k], "single-heterodyne l");
    if (k < grid.n_steps()) {
      const double d = samples[k].gamma.one_minus_abs2();
      integrals += 0.5 * dt * (gamma_term(k) + gamma_term(k + 1)) +
                   alpha2_coeff(k) * alphas[k] * alphas[k] * dt +
                   sqrt_mu * std::polar(1.0, -params.phase(t)) * alphas[k] / std::sqrt(d) *
                       path.increments[k].real();
    }
  }
  return ls;
}

Het1Solution solve(const NoisePath& path, const ModelParams& params, const SqueezeParam& xi0,
                   cplx alpha0) {
  Het1Solution sol =
      solve(path, params, riccati_closed(path.grid, params, gamma_from_squeeze(xi0)), alpha0);
  sol.xi0 = xi0;
  sol.frames.front().record.squeeze = xi0;
  return sol;
}

Het1Solution solve(const NoisePath& path, const ModelParams& params,
                   const RiccatiSolution& gamma_solution, cplx alpha0) {
  params.validate();
  const std::vector<cplx> alphas = alpha_trajectory_single(path, params, gamma_solution, alpha0);
  const std::vector<cplx> ls = l_trajectory_single(path, params, gamma_solution, alphas);
  Het1Solution sol{params, squeeze_from_gamma(gamma_solution.gamma0), alpha0, {}};
  sol.frames.reserve(alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    PosteriorFrame f;
    f.t = path.grid.time(k);
    f.record = {ls[k], squeeze_from_gamma(gamma_solution.samples[k].gamma), alphas[k]};
    const auto [dX, dY] = uncertainties_single(gamma_solution.samples[k].gamma);
    const cplx mean = mean_annihilation(f.record.squeeze, alphas[k]);
    f.moments = {mean.real(), mean.imag(), dX, dY};
    sol.frames.push_back(f);
  }
  return sol;
}

}  // namespace sqf::het1
