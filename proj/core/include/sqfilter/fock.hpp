#pragma once

#include <Eigen/Dense>

#include "sqfilter/core.hpp"

/// Brute-force number-basis oracle. Everything here is independent of the
/// closed forms in het1/het2: states are built by matrix exponentiation or
/// the normally ordered squeeze product, and the linear filter is integrated
/// by Euler-Maruyama.
namespace sqf::fock {

using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kDefaultTailTolerance = 1e-10;

/// Truncated state sum_{n <= cutoff} c_n |n>.
struct FockVector {
  Vector amplitudes;

  int cutoff() const { return static_cast<int>(amplitudes.size()) - 1; }
  double norm2() const { return amplitudes.squaredNorm(); }
  /// (|c_N|^2 + |c_{N-1}|^2) / ||c||^2.
  double tail_mass() const;
};

struct FockMatrix {
  Matrix entries;
  int cutoff() const { return static_cast<int>(entries.rows()) - 1; }
};

/// Hermitian, unit trace, positive semidefinite (checked by validate()).
struct DensityMatrix {
  Matrix entries;
  int cutoff() const { return static_cast<int>(entries.rows()) - 1; }
  /// Throws NumericError on trace/hermiticity/positivity violation.
  void validate(double positivity_tol = 1e-9) const;
};

struct LadderOperators {
  FockMatrix a;
  FockMatrix a_dag;
  FockMatrix hamiltonian;  // omega (a^dag a + 1/2)
};

/// <m|a|n> = sqrt(n) delta_{m, n-1}. [a, a^dag] is the identity except for
/// the (N, N) corner, where truncation gives -N.
LadderOperators build_operators(int cutoff, double omega = 1.0);

/// X = (a + a^dag)/2 and Y = (a - a^dag)/2i.
FockMatrix quadrature_x(int cutoff);
FockMatrix quadrature_y(int cutoff);

/// Dense matrix exponential by scaling and squaring of a Taylor series.
Matrix expm(const Matrix& m);

enum class SqueezeConstruction { NormalOrdered, MatrixExponential };

/// S(xi) D(alpha)|0> truncated at `cutoff`. Throws ConfigError if the tail
/// mass exceeds `tail_tol` (cutoff too small) or cutoff < 8.
FockVector build_squeezed_coherent(const SqueezeParam& xi, cplx alpha, int cutoff,
                                   SqueezeConstruction method = SqueezeConstruction::NormalOrdered,
                                   double tail_tol = kDefaultTailTolerance);

/// Smallest cutoff >= 8 whose squeezed coherent state passes the tail test.
int choose_cutoff(const SqueezeParam& xi, cplx alpha, double tail_tol = kDefaultTailTolerance,
                  int max_cutoff = 4000);

/// Largest residual of the Bogoliubov identities
///   S^dag a S = a cosh rho - a^dag e^{i theta} sinh rho,
///   S a S^dag |xi, alpha> = alpha |xi, alpha>,
/// with S from expm, measured on number states n <= 3 and the first 12 rows.
double bogoliubov_check(const SqueezeParam& xi, int cutoff, cplx alpha = {0.7, 0.0});

/// One Euler-Maruyama step of the linear filter
///   dpsi = -(i omega (a^dag a + 1/2) + mu/2 a^dag a) psi dt
///          + sqrt(mu) e^{-i phi(t)} a psi dQ,
/// with phi evaluated at the step start t. For single heterodyne dQ must be
/// real. The state is not renormalised.
void sde_step(FockVector& psi, cplx dQ, double dt, double t, const ModelParams& params);

/// <psi|Z psi> / <psi|psi>.
cplx posterior_expectation(const FockVector& psi, const FockMatrix& z);

/// <a>, <a^2>, <a^dag a> of the normalised state, computed from the
/// amplitudes directly.
struct LadderMoments {
  cplx a;
  cplx a2;
  double n;
};
LadderMoments ladder_moments(const FockVector& psi);

/// Posterior quadrature moments of a (possibly unnormalised) Fock state.
QuadratureMoments quadrature_moments(const FockVector& psi);

/// |<phi|psi>|^2 / (||phi||^2 ||psi||^2).
double fidelity(const FockVector& phi, const FockVector& psi);

/// RK4 step of d rho/dt = -i[H, rho] + mu (a rho a^dag - {a^dag a, rho}/2).
/// When `check` is set, throws NumericError if the result has an eigenvalue
/// below -1e-6 or the trace drifts by more than 1e-10.
void lindblad_step(DensityMatrix& rho, double dt, const ModelParams& params, bool check = true);

/// Repeated lindblad_step over [0, t_end]; positivity is checked every
/// `check_every` steps and at the end.
void lindblad_evolve(DensityMatrix& rho, double t_end, double dt, const ModelParams& params,
                     std::size_t check_every = 200);

DensityMatrix projector(const FockVector& psi);
double purity(const DensityMatrix& rho);
/// <psi|rho|psi> / <psi|psi>.
double fidelity(const DensityMatrix& rho, const FockVector& psi);
/// (1/2) sum |eig(rho - sigma)|.
double trace_distance(const Matrix& rho, const Matrix& sigma);

struct SqueezedCoherentFit {
  SqueezeParam xi;
  cplx alpha;
  double fidelity = 0.0;
  /// Set when the second moments are inconsistent with a pure Gaussian
  /// state or the fidelity of the best-effort fit is below 1 - 1e-6.
  bool non_gaussian = false;
};

/// Recovers (xi, alpha) from first and centred second moments:
///   Gamma = -(<a^2> - <a>^2) / (1 + <a^dag a> - |<a>|^2),
///   alpha = <a> cosh rho + conj(<a>) e^{i theta} sinh rho.
SqueezedCoherentFit fit_squeezed_coherent(const FockVector& psi);

}  // namespace sqf::fock
