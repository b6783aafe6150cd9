#pragma once

#include <span>
#include <vector>

#include "sqfilter/core.hpp"
#include "sqfilter/noise.hpp"

/// Posterior evolution of a squeezed coherent state under single balanced
/// heterodyne detection (one channel, real record).
///
/// The disk coordinate obeys the deterministic Riccati flow
///   dGamma/dt = -(2 i omega + mu) Gamma + mu e^{-2 i phi(t)} Gamma^2,
/// available here both in closed form and by RK4. The displacement and the
/// likelihood amplitude are Ito functionals of the record.
namespace sqf::het1 {

struct RiccatiSample {
  double t = 0.0;
  GammaParam gamma;
};

struct RiccatiSolution {
  ModelParams params;
  GammaParam gamma0;
  TimeGrid grid;
  std::vector<RiccatiSample> samples;  // one per grid point, k = 0..n_steps
};

/// Denominators below this magnitude raise SingularityError.
inline constexpr double kSingularityThreshold = 1e-12;

/// Gamma(t) = Gamma0 e^{-(2 i omega + mu) t} / (1 - mu Gamma0 I(t)) with
/// I(t) = int_0^t e^{-(2 i omega + mu) s - 2 i phi(s)} ds in closed form.
GammaParam gamma_closed_general(double t, const ModelParams& params, const GammaParam& gamma0);

/// Specialisation for phi(t) = pi/2 + vartheta t. Requires phi0 = pi/2.
GammaParam gamma_closed_linear_phase(double t, const ModelParams& params,
                                     const GammaParam& gamma0);

/// Closed-form flow sampled on every grid point.
RiccatiSolution riccati_closed(const TimeGrid& grid, const ModelParams& params,
                               const GammaParam& gamma0);

/// Classical RK4 with `substeps` steps per grid interval. Throws
/// NumericError if |Gamma| reaches 1.
RiccatiSolution riccati_integrate(const TimeGrid& grid, const ModelParams& params,
                                  const GammaParam& gamma0, std::size_t substeps = 1);

/// RK4 with step doubling until successive refinements agree to `tol`
/// (relative, max over the grid).
RiccatiSolution riccati_integrate_converged(const TimeGrid& grid, const ModelParams& params,
                                            const GammaParam& gamma0, double tol = 1e-11);

/// (dX, dY) from kappa = (1 + Gamma)/(1 - Gamma).
std::pair<double, double> uncertainties_single(const GammaParam& g);

/// alpha(t_k), k = 0..n_steps. Requires a Real path on the Riccati grid.
std::vector<cplx> alpha_trajectory_single(const NoisePath& path, const ModelParams& params,
                                          const RiccatiSolution& gamma_solution, cplx alpha0);

/// l(t_k), k = 0..n_steps; `alphas` from alpha_trajectory_single on the same
/// path.
std::vector<cplx> l_trajectory_single(const NoisePath& path, const ModelParams& params,
                                      const RiccatiSolution& gamma_solution,
                                      std::span<const cplx> alphas);

struct Het1Solution {
  ModelParams params;
  SqueezeParam xi0;
  cplx alpha0;
  std::vector<PosteriorFrame> frames;
};

Het1Solution solve(const NoisePath& path, const ModelParams& params, const SqueezeParam& xi0,
                   cplx alpha0);

/// As above, reusing a precomputed Gamma flow (it is noise independent).
Het1Solution solve(const NoisePath& path, const ModelParams& params,
                   const RiccatiSolution& gamma_solution, cplx alpha0);

}  // namespace sqf::het1
