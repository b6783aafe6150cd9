#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace sqf {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// ---------------------------------------------------------------------------
// Errors. Each family maps onto one CLI exit code (see tools/).

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numeric guard tripped (non-finite value, vanishing denominator,
/// invariant violation during integration).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Closed-form denominator fell below the singularity threshold.
class SingularityError : public NumericError {
 public:
  using NumericError::NumericError;
};

// ---------------------------------------------------------------------------

enum class Scheme { DoubleHeterodyne, SingleHeterodyne };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

/// Oscillator and detector parameters. hbar = 1, so the Hamiltonian is
/// omega (a^dag a + 1/2). The local-oscillator phase is phi0 + vartheta t.
struct ModelParams {
  double omega = 1.0;
  double mu = 0.01;
  double phi0 = 0.0;
  double vartheta = 0.05;
  Scheme scheme = Scheme::DoubleHeterodyne;

  /// Throws ConfigError unless omega > 0 and mu > 0 (all finite).
  void validate() const;

  double phase(double t) const { return phi0 + vartheta * t; }
};

/// Squeeze parameter xi = rho e^{i theta}. theta is kept unwrapped so that
/// linear phase laws stay exact; use wrapped_theta() for output.
class SqueezeParam {
 public:
  SqueezeParam() = default;
  SqueezeParam(double rho, double theta);

  double rho() const { return rho_; }
  double theta() const { return theta_; }
  double wrapped_theta() const;
  cplx xi() const { return std::polar(rho_, theta_); }

 private:
  double rho_ = 0.0;
  double theta_ = 0.0;
};

/// Disk coordinate Gamma = e^{i theta} tanh rho, |Gamma| < 1.
///
/// Besides the complex value the type carries complement() = 1 - |Gamma|
/// computed without cancellation, so squeezes up to rho ~ 20 (where tanh rho
/// rounds to 1 in double precision) still round-trip exactly.
class GammaParam {
 public:
  GammaParam() = default;
  /// Throws ConfigError unless |g| < 1.
  explicit GammaParam(cplx g);
  /// Trusted constructor: complement must equal 1 - |g| and be positive.
  GammaParam(cplx g, double complement);

  cplx value() const { return value_; }
  double magnitude() const { return 1.0 - complement_; }
  double complement() const { return complement_; }
  /// 1 - |Gamma|^2.
  double one_minus_abs2() const { return complement_ * (2.0 - complement_); }
  /// cosh rho.
  double gamma1() const;
  /// e^{i theta} sinh rho.
  cplx gamma2() const;

 private:
  cplx value_{0.0, 0.0};
  double complement_ = 1.0;
};

/// Posterior state l S(xi) |alpha>, with |alpha> the normalised coherent
/// state. |l|^2 is the likelihood of the record relative to Wiener measure.
struct SqueezedCoherentRecord {
  cplx l{1.0, 0.0};
  SqueezeParam squeeze;
  cplx alpha{0.0, 0.0};
};

/// Posterior means and standard deviations of X = (a + a^dag)/2 and
/// Y = (a - a^dag)/2i.
struct QuadratureMoments {
  double meanX = 0.0;
  double meanY = 0.0;
  double dX = 0.5;
  double dY = 0.5;
};

/// One grid point of a posterior trajectory.
struct PosteriorFrame {
  double t = 0.0;
  SqueezedCoherentRecord record;
  QuadratureMoments moments;
};

GammaParam gamma_from_squeeze(const SqueezeParam& s);

/// Inverse of gamma_from_squeeze. theta = arg(gamma); gamma = 0 maps to
/// (0, 0).
SqueezeParam squeeze_from_gamma(const GammaParam& g);

/// Moebius map (1 + Gamma)/(1 - Gamma) onto the right half-plane.
cplx kappa(const GammaParam& g);

/// (dX, dY) = ((4 Re k)^{-1/2}, |k| (4 Re k)^{-1/2}) with k = kappa(g),
/// evaluated in a cancellation-free form.
std::pair<double, double> quadrature_uncertainties(const GammaParam& g);
/// Same, from 1 - |Gamma| and the (possibly unwrapped) phase of Gamma.
std::pair<double, double> quadrature_uncertainties(double complement, double theta);

/// <a> in the state S(xi)|alpha>.
cplx mean_annihilation(const SqueezeParam& s, cplx alpha);

QuadratureMoments moments_from_record(const SqueezedCoherentRecord& r);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Throws NumericError naming `what` if z is not finite.
void require_finite(cplx z, const char* what);
void require_finite(double x, const char* what);

}  // namespace sqf
