#include "sqfilter/core.hpp"

#include <cmath>

namespace sqf {

std::string to_string(Scheme s) {
  return s == Scheme::DoubleHeterodyne ? "double" : "single";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "double" || name == "double-heterodyne") return Scheme::DoubleHeterodyne;
  if (name == "single" || name == "single-heterodyne") return Scheme::SingleHeterodyne;
  throw ConfigError("unknown detection scheme '" + name + "' (expected double|single)");
}

void ModelParams::validate() const {
  if (!std::isfinite(omega) || omega <= 0.0) throw ConfigError("omega must be finite and > 0");
  if (!std::isfinite(mu) || mu <= 0.0) throw ConfigError("mu must be finite and > 0");
  if (!std::isfinite(phi0) || !std::isfinite(vartheta))
    throw ConfigError("phi0 and vartheta must be finite");
}

SqueezeParam::SqueezeParam(double rho, double theta) : rho_(rho), theta_(theta) {
  if (!std::isfinite(rho) || rho < 0.0) throw ConfigError("squeeze magnitude rho must be finite and >= 0");
  if (!std::isfinite(theta)) throw ConfigError("squeeze phase theta must be finite");
  if (rho_ == 0.0) theta_ = 0.0;
}

double SqueezeParam::wrapped_theta() const { return wrap_angle(theta_); }

GammaParam::GammaParam(cplx g) : value_(g), complement_(1.0 - std::abs(g)) {
  if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
    throw ConfigError("gamma must be finite");
  if (!(complement_ > 0.0)) throw ConfigError("|gamma| must be < 1 (nonphysical squeeze)");
}

GammaParam::GammaParam(cplx g, double complement) : value_(g), complement_(complement) {
  if (!(complement_ > 0.0) || complement_ > 1.0)
    throw NumericError("gamma complement 1-|gamma| out of (0, 1]");
}

double GammaParam::gamma1() const { return 1.0 / std::sqrt(one_minus_abs2()); }

cplx GammaParam::gamma2() const { return value_ * gamma1(); }

GammaParam gamma_from_squeeze(const SqueezeParam& s) {
  // 1 - tanh(rho) = 2 e^{-2 rho} / (1 + e^{-2 rho})
  const double e = std::exp(-2.0 * s.rho());
  const double complement = 2.0 * e / (1.0 + e);
  return GammaParam(std::polar(std::tanh(s.rho()), s.theta()), complement);
}

SqueezeParam squeeze_from_gamma(const GammaParam& g) {
  const double mag = std::abs(g.value());
  if (mag == 0.0) return SqueezeParam(0.0, 0.0);
  // artanh|g| = 1/2 log((1 + |g|)/(1 - |g|))
  const double rho = 0.5 * std::log1p(2.0 * mag / g.complement());
  return SqueezeParam(rho, std::arg(g.value()));
}

cplx kappa(const GammaParam& g) { return (1.0 + g.value()) / (1.0 - g.value()); }

std::pair<double, double> quadrature_uncertainties(const GammaParam& g) {
  return quadrature_uncertainties(g.complement(), std::arg(g.value()));
}

std::pair<double, double> quadrature_uncertainties(double complement, double theta) {
  const double m = complement;
  const double t = 1.0 - m;
  const double half = 0.5 * theta;
  const double s = std::sin(half);
  const double c = std::cos(half);
  // |1 - G|^2 = m^2 + 4 t sin^2(theta/2), |1 + G|^2 = m^2 + 4 t cos^2(theta/2)
  const double denom = 4.0 * m * (2.0 - m);
  return {std::sqrt((m * m + 4.0 * t * s * s) / denom),
          std::sqrt((m * m + 4.0 * t * c * c) / denom)};
}

cplx mean_annihilation(const SqueezeParam& s, cplx alpha) {
  return alpha * std::cosh(s.rho()) -
         std::conj(alpha) * std::polar(std::sinh(s.rho()), s.theta());
}

QuadratureMoments moments_from_record(const SqueezedCoherentRecord& r) {
  const auto [dX, dY] =
      quadrature_uncertainties(gamma_from_squeeze(r.squeeze).complement(), r.squeeze.theta());
  const cplx mean = mean_annihilation(r.squeeze, r.alpha);
  return {mean.real(), mean.imag(), dX, dY};
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

void require_finite(cplx z, const char* what) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw NumericError(std::string("non-finite value in ") + what);
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NumericError(std::string("non-finite value in ") + what);
}

}  // namespace sqf
