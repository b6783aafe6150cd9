#pragma once

#include <span>
#include <vector>

#include "sqfilter/core.hpp"
#include "sqfilter/noise.hpp"

/// Posterior evolution of a squeezed coherent state under double heterodyne
/// detection (two quadrature channels, complex record dQ with dQ^2 = 0).
///
/// The squeeze follows a deterministic contraction of the disk coordinate,
///   tanh rho(t) = e^{-mu t} tanh rho0,   theta(t) = theta0 - 2 omega t,
/// so quadrature uncertainties never depend on the record. The displacement
/// alpha(t) and the likelihood amplitude l(t) are Ito functionals of the
/// record and are evaluated with left-endpoint sums on the record's own grid.
namespace sqf::het2 {

enum class SqueezeRegion { XSqueezed, YSqueezed, None };

SqueezeParam squeeze_at(double t, const ModelParams& params, const SqueezeParam& xi0);

/// Gamma(t) = Gamma0 e^{-(2 i omega + mu) t}, with 1 - |Gamma(t)| formed
/// without cancellation.
GammaParam gamma_at(double t, const ModelParams& params, const SqueezeParam& xi0);

/// C(t) = 2 e^{-mu t} tanh rho0 / (1 - e^{-2 mu t} tanh^2 rho0).
double c_factor(double t, const ModelParams& params, double rho0);

/// (dX, dY) at time t. Algebraically
///   dX = 1/2 [1 + C (e^{-mu t} tanh rho0 - cos(theta0 - 2 omega t))]^{1/2},
///   dY = 1/2 [1 + C (e^{-mu t} tanh rho0 + cos(theta0 - 2 omega t))]^{1/2},
/// but evaluated in a form that stays accurate for rho0 up to ~20.
std::pair<double, double> uncertainties(double t, const ModelParams& params, double rho0,
                                        double theta0);

/// Which quadrature (if any) is below the vacuum level 1/2. Always None for
/// rho0 = 0.
SqueezeRegion squeeze_region(double t, const ModelParams& params, double rho0, double theta0);

/// alpha(t_k) for k = 0..n_steps. Requires a Complex path.
std::vector<cplx> alpha_trajectory(const NoisePath& path, const ModelParams& params,
                                   const SqueezeParam& xi0, cplx alpha0);

/// l(t_k) for k = 0..n_steps; `alphas` must come from alpha_trajectory on
/// the same path.
std::vector<cplx> l_trajectory(const NoisePath& path, const ModelParams& params,
                               const SqueezeParam& xi0, cplx alpha0,
                               std::span<const cplx> alphas);

struct Het2Solution {
  ModelParams params;
  SqueezeParam xi0;
  cplx alpha0;
  std::vector<PosteriorFrame> frames;
};

/// Full posterior record (l, xi, alpha) and moments on every grid point.
Het2Solution solve(const NoisePath& path, const ModelParams& params, const SqueezeParam& xi0,
                   cplx alpha0);

}  // namespace sqf::het2
