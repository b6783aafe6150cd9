#include "sqfilter/fock.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sqf::fock {
namespace {

// S(xi)|alpha> from the normally ordered squeeze operator:
//   (cosh rho)^{-1/2} e^{conj(G) alpha^2/2 - |alpha|^2/2} e^{-G a^dag^2/2} |alpha / cosh rho>~
// where |.>~ is the unnormalised coherent vector. The Bargmann function is
// exp(-G z^2/2 + beta z); its coefficients obey
//   h_{n+1} = (beta h_n - G sqrt(n) h_{n-1}) / sqrt(n+1).
Vector normal_ordered_amplitudes(const SqueezeParam& xi, cplx alpha, int cutoff) {
  const GammaParam g = gamma_from_squeeze(xi);
  const cplx gamma = g.value();
  const double cosh_rho = g.gamma1();
  const cplx beta = alpha / cosh_rho;
  const cplx prefactor = std::exp(std::conj(gamma) * alpha * alpha / 2.0 - std::norm(alpha) / 2.0) /
                         std::sqrt(cosh_rho);
  Vector h(cutoff + 1);
  h(0) = 1.0;
  if (cutoff >= 1) h(1) = beta;
  for (int n = 1; n < cutoff; ++n)
    h(n + 1) = (beta * h(n) - gamma * std::sqrt(static_cast<double>(n)) * h(n - 1)) /
               std::sqrt(static_cast<double>(n + 1));
  return prefactor * h;
}

Vector coherent_amplitudes(cplx alpha, int cutoff) {
  Vector c(cutoff + 1);
  c(0) = std::exp(-std::norm(alpha) / 2.0);
  for (int n = 1; n <= cutoff; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

Matrix annihilation(int cutoff) {
  Matrix a = Matrix::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix squeeze_operator(const SqueezeParam& xi, int cutoff) {
  const Matrix a = annihilation(cutoff);
  const Matrix a2 = a * a;
  const cplx z = xi.xi();
  return expm(0.5 * std::conj(z) * a2 - 0.5 * z * a2.adjoint());
}

double tail_of(const Vector& v) {
  const Eigen::Index n = v.size();
  const double total = v.squaredNorm();
  if (total == 0.0) return 0.0;
  double tail = std::norm(v(n - 1));
  if (n >= 2) tail += std::norm(v(n - 2));
  return tail / total;
}

Matrix lindblad_rhs(const Matrix& rho, const ModelParams& p) {
  const Eigen::Index dim = rho.rows();
  Matrix out(dim, dim);
  for (Eigen::Index n = 0; n < dim; ++n) {
    for (Eigen::Index m = 0; m < dim; ++m) {
      const double dm = static_cast<double>(m);
      const double dn = static_cast<double>(n);
      cplx v = cplx{-p.mu * (dm + dn) / 2.0, -p.omega * (dm - dn)} * rho(m, n);
      if (m + 1 < dim && n + 1 < dim)
        v += p.mu * std::sqrt((dm + 1.0) * (dn + 1.0)) * rho(m + 1, n + 1);
      out(m, n) = v;
    }
  }
  return out;
}

double min_eigenvalue(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

double FockVector::tail_mass() const { return tail_of(amplitudes); }

void DensityMatrix::validate(double positivity_tol) const {
  const cplx tr = entries.trace();
  if (std::abs(tr - 1.0) > 1e-9) throw NumericError("density matrix trace differs from 1");
  if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw NumericError("density matrix is not Hermitian");
  if (min_eigenvalue(entries) < -positivity_tol)
    throw NumericError("density matrix has a negative eigenvalue");
}

LadderOperators build_operators(int cutoff, double omega) {
  if (cutoff < 1) throw ConfigError("Fock cutoff must be >= 1");
  LadderOperators ops;
  ops.a.entries = annihilation(cutoff);
  ops.a_dag.entries = ops.a.entries.adjoint();
  ops.hamiltonian.entries = Matrix::Zero(cutoff + 1, cutoff + 1);
  for (int n = 0; n <= cutoff; ++n) ops.hamiltonian.entries(n, n) = omega * (n + 0.5);
  return ops;
}

FockMatrix quadrature_x(int cutoff) {
  const Matrix a = annihilation(cutoff);
  return {0.5 * (a + a.adjoint())};
}

FockMatrix quadrature_y(int cutoff) {
  const Matrix a = annihilation(cutoff);
  return {cplx{0.0, -0.5} * (a - a.adjoint())};
}

Matrix expm(const Matrix& m) {
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix scaled = m / std::ldexp(1.0, squarings);
  const Eigen::Index dim = m.rows();
  Matrix result = Matrix::Identity(dim, dim);
  Matrix term = Matrix::Identity(dim, dim);
  for (int k = 1; k <= 40; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-20 * result.cwiseAbs().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

FockVector build_squeezed_coherent(const SqueezeParam& xi, cplx alpha, int cutoff,
                                   SqueezeConstruction method, double tail_tol) {
  if (cutoff < 8) throw ConfigError("Fock cutoff must be >= 8");
  FockVector psi;
  if (method == SqueezeConstruction::NormalOrdered) {
    psi.amplitudes = normal_ordered_amplitudes(xi, alpha, cutoff);
  } else {
    // Exponentiate in a padded space so the truncation corner stays far
    // from the retained amplitudes.
    const int padded = cutoff + std::max(40, cutoff / 2);
    const Vector full = squeeze_operator(xi, padded) * coherent_amplitudes(alpha, padded);
    psi.amplitudes = full.head(cutoff + 1);
  }
  if (psi.tail_mass() > tail_tol)
    throw ConfigError("Fock cutoff " + std::to_string(cutoff) +
                      " too small: tail mass exceeds tolerance");
  return psi;
}

int choose_cutoff(const SqueezeParam& xi, cplx alpha, double tail_tol, int max_cutoff) {
  const Vector amps = normal_ordered_amplitudes(xi, alpha, max_cutoff);
  double prefix = 0.0;
  for (int n = 0; n <= max_cutoff; ++n) {
    prefix += std::norm(amps(n));
    if (n < 8) continue;
    const double tail = (std::norm(amps(n)) + std::norm(amps(n - 1))) / prefix;
    if (tail < tail_tol && 1.0 - prefix < tail_tol) return n;
  }
  throw ConfigError("no Fock cutoff <= " + std::to_string(max_cutoff) +
                    " satisfies the tail criterion");
}

double bogoliubov_check(const SqueezeParam& xi, int cutoff, cplx alpha) {
  if (cutoff < 8) throw ConfigError("Fock cutoff must be >= 8");
  const Matrix a = annihilation(cutoff);
  const Matrix ad = a.adjoint();
  const Matrix s = squeeze_operator(xi, cutoff);
  const double ch = std::cosh(xi.rho());
  const cplx sh = std::polar(std::sinh(xi.rho()), xi.theta());
  // Fixed low-number probes and rows, so the residual measures truncation
  // alone and shrinks as the cutoff grows.
  const Eigen::Index rows = std::min(12, cutoff / 3);
  const int probes = std::min(3, cutoff / 4);

  double worst = 0.0;
  const Matrix lhs = s.adjoint() * a * s;
  const Matrix rhs = a * ch - ad * sh;
  for (int n = 0; n <= probes; ++n) {
    const Vector diff = (lhs - rhs).col(n).head(rows);
    worst = std::max(worst, diff.norm());
  }
  const Vector psi = normal_ordered_amplitudes(xi, alpha, cutoff);
  const Vector eig = s * (a * (s.adjoint() * psi)) - alpha * psi;
  worst = std::max(worst, eig.head(rows).norm());
  return worst;
}

void sde_step(FockVector& psi, cplx dQ, double dt, double t, const ModelParams& params) {
  if (params.scheme == Scheme::SingleHeterodyne && dQ.imag() != 0.0)
    throw ConfigError("single heterodyne requires a real increment");
  Vector& c = psi.amplitudes;
  const int cutoff = psi.cutoff();
  const cplx kick = std::sqrt(params.mu) * std::polar(1.0, -params.phase(t)) * dQ;
  for (int n = 0; n <= cutoff; ++n) {
    const double dn = static_cast<double>(n);
    cplx next = c(n) * cplx{1.0 - params.mu * dn / 2.0 * dt, -params.omega * (dn + 0.5) * dt};
    if (n < cutoff) next += kick * std::sqrt(dn + 1.0) * c(n + 1);
    c(n) = next;
  }
  if (!c.allFinite()) throw NumericError("Fock filter state became non-finite");
}

cplx posterior_expectation(const FockVector& psi, const FockMatrix& z) {
  const double n2 = psi.norm2();
  if (!(n2 > 0.0)) throw NumericError("posterior expectation of a zero vector");
  return psi.amplitudes.dot(z.entries * psi.amplitudes) / n2;
}

LadderMoments ladder_moments(const FockVector& psi) {
  const Vector& c = psi.amplitudes;
  const double n2 = psi.norm2();
  if (!(n2 > 0.0)) throw NumericError("moments of a zero vector");
  cplx a{0.0, 0.0};
  cplx a2{0.0, 0.0};
  double n = 0.0;
  const Eigen::Index dim = c.size();
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double dk = static_cast<double>(k);
    n += dk * std::norm(c(k));
    if (k + 1 < dim) a += std::conj(c(k)) * std::sqrt(dk + 1.0) * c(k + 1);
    if (k + 2 < dim) a2 += std::conj(c(k)) * std::sqrt((dk + 1.0) * (dk + 2.0)) * c(k + 2);
  }
  return {a / n2, a2 / n2, n / n2};
}

QuadratureMoments quadrature_moments(const FockVector& psi) {
  const LadderMoments m = ladder_moments(psi);
  const double x2 = (2.0 * m.a2.real() + 2.0 * m.n + 1.0) / 4.0;
  const double y2 = (-2.0 * m.a2.real() + 2.0 * m.n + 1.0) / 4.0;
  const double mx = m.a.real();
  const double my = m.a.imag();
  return {mx, my, std::sqrt(std::max(0.0, x2 - mx * mx)), std::sqrt(std::max(0.0, y2 - my * my))};
}

double fidelity(const FockVector& phi, const FockVector& psi) {
  if (phi.amplitudes.size() != psi.amplitudes.size())
    throw ConfigError("fidelity: cutoff mismatch");
  return std::norm(phi.amplitudes.dot(psi.amplitudes)) / (phi.norm2() * psi.norm2());
}

void lindblad_step(DensityMatrix& rho, double dt, const ModelParams& params, bool check) {
  const Matrix& r = rho.entries;
  const Matrix k1 = lindblad_rhs(r, params);
  const Matrix k2 = lindblad_rhs(r + dt / 2.0 * k1, params);
  const Matrix k3 = lindblad_rhs(r + dt / 2.0 * k2, params);
  const Matrix k4 = lindblad_rhs(r + dt * k3, params);
  const cplx trace_before = r.trace();
  Matrix next = r + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  rho.entries = 0.5 * (next + next.adjoint());
  if (!rho.entries.allFinite()) throw NumericError("Lindblad state became non-finite");
  if (check) {
    if (std::abs(rho.entries.trace() - trace_before) > 1e-10)
      throw NumericError("Lindblad step changed the trace");
    if (min_eigenvalue(rho.entries) < -1e-6)
      throw NumericError("Lindblad step lost positivity");
  }
}

void lindblad_evolve(DensityMatrix& rho, double t_end, double dt, const ModelParams& params,
                     std::size_t check_every) {
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  for (std::size_t k = 1; k <= steps; ++k)
    lindblad_step(rho, dt, params, k == steps || (check_every > 0 && k % check_every == 0));
}

DensityMatrix projector(const FockVector& psi) {
  return {psi.amplitudes * psi.amplitudes.adjoint() / psi.norm2()};
}

double purity(const DensityMatrix& rho) {
  return (rho.entries * rho.entries).trace().real();
}

double fidelity(const DensityMatrix& rho, const FockVector& psi) {
  return psi.amplitudes.dot(rho.entries * psi.amplitudes).real() / psi.norm2();
}

double trace_distance(const Matrix& rho, const Matrix& sigma) {
  const Matrix d = rho - sigma;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

SqueezedCoherentFit fit_squeezed_coherent(const FockVector& psi) {
  const LadderMoments m = ladder_moments(psi);
  const double n_centred = m.n - std::norm(m.a);
  const cplx v = m.a2 - m.a * m.a;
  SqueezedCoherentFit fit;
  cplx gamma = -v / (1.0 + n_centred);
  if (std::abs(gamma) >= 1.0) {
    gamma *= (1.0 - 1e-9) / std::abs(gamma);
    fit.non_gaussian = true;
  }
  // A pure Gaussian state has |V|^2 = N (N + 1).
  const double target = n_centred * (n_centred + 1.0);
  if (std::abs(std::norm(v) - target) > 1e-6 * (1.0 + target)) fit.non_gaussian = true;

  fit.xi = squeeze_from_gamma(GammaParam(gamma));
  const double ch = std::cosh(fit.xi.rho());
  const cplx sh = std::polar(std::sinh(fit.xi.rho()), fit.xi.theta());
  fit.alpha = m.a * ch + std::conj(m.a) * sh;
  FockVector model{normal_ordered_amplitudes(fit.xi, fit.alpha, psi.cutoff())};
  fit.fidelity = fidelity(model, psi);
  if (fit.fidelity < 1.0 - 1e-6) fit.non_gaussian = true;
  return fit;
}

}  // namespace sqf::fock
