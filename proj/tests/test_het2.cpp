#include <doctest.h>

#include <cmath>
#include <random>

#include "sqfilter/fock.hpp"
#include "sqfilter/het2.hpp"

using namespace sqf;

namespace {

// RK4 for d rho = -mu sinh rho cosh rho dt.
double rho_rk4(double rho, double mu, double t, int steps) {
  const double h = t / steps;
  auto f = [mu](double r) { return -mu * std::sinh(r) * std::cosh(r); };
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(rho), k2 = f(rho + h / 2 * k1), k3 = f(rho + h / 2 * k2),
                 k4 = f(rho + h * k3);
    rho += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return rho;
}

ModelParams params(double omega, double mu) {
  ModelParams p;
  p.omega = omega;
  p.mu = mu;
  p.phi0 = 0.3;
  p.vartheta = 0.05;
  return p;
}

}  // namespace

TEST_CASE("squeeze flow") {
  const auto p = params(1.0, 0.1);
  const auto s0 = het2::squeeze_at(0.0, p, SqueezeParam(0.5, 1.0));
  CHECK(s0.rho() == 0.5);
  CHECK(s0.theta() == 1.0);

  // mu t = 1, omega t = pi.
  ModelParams q = params(1.0, 1.0 / kPi);
  const auto s = het2::squeeze_at(kPi, q, SqueezeParam(0.5, 0.0));
  CHECK(s.rho() == doctest::Approx(rho_rk4(0.5, q.mu, kPi, 4000)).epsilon(1e-11));
  CHECK(s.rho() == doctest::Approx(0.17168).epsilon(1e-4));
  CHECK(s.theta() == doctest::Approx(-2 * kPi));

  const auto far = het2::squeeze_at(400.0, params(1.0, 0.1), SqueezeParam(8.0, 0.0));
  CHECK(far.rho() == doctest::Approx(std::exp(-40.0) * std::tanh(8.0)).epsilon(1e-12));
  CHECK(far.rho() < 5e-18);
}

TEST_CASE("squeeze flow is a semigroup with linear phase") {
  const auto p = params(1.3, 0.2);
  const SqueezeParam xi0(1.5, 0.4);
  for (double t1 : {0.1, 1.0, 3.7})
    for (double t2 : {0.2, 2.5}) {
      const auto mid = het2::squeeze_at(t1, p, xi0);
      const auto two = het2::squeeze_at(t2, p, mid);
      const auto one = het2::squeeze_at(t1 + t2, p, xi0);
      CHECK(std::abs(two.rho() - one.rho()) < 1e-12);
      CHECK(one.theta() - xi0.theta() ==
            doctest::Approx((mid.theta() - xi0.theta()) + (two.theta() - mid.theta())));
    }
}

TEST_CASE("double heterodyne uncertainties") {
  const auto p = params(1.0, 0.01);
  for (double t : {0.0, 1.0, 50.0}) {
    const auto [dx, dy] = het2::uncertainties(t, p, 0.0, 0.3);
    CHECK(dx == doctest::Approx(0.5));
    CHECK(dy == doctest::Approx(0.5));
  }
  const auto [dx0, dy0] = het2::uncertainties(0.0, p, 0.5, 0.0);
  CHECK(dx0 == doctest::Approx(std::exp(-0.5) / 2).epsilon(1e-12));
  CHECK(dy0 == doctest::Approx(std::exp(0.5) / 2).epsilon(1e-12));

  // Printed C(t) form, well conditioned at these parameters.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t(0.0, 300.0), rho(0.01, 3.0), th(-kPi, kPi);
  for (int i = 0; i < 2000; ++i) {
    const double tt = t(rng), r = rho(rng), th0 = th(rng);
    const double s = std::exp(-p.mu * tt) * std::tanh(r);
    const double c = 2 * s / (1 - s * s);
    const double cosv = std::cos(th0 - 2 * p.omega * tt);
    const auto [dx, dy] = het2::uncertainties(tt, p, r, th0);
    CHECK(dx == doctest::Approx(0.5 * std::sqrt(1 + c * (s - cosv))).epsilon(1e-9));
    CHECK(dy == doctest::Approx(0.5 * std::sqrt(1 + c * (s + cosv))).epsilon(1e-9));
  }

  // Minimum uncertainty exactly at cos(theta0 - 2 omega t) = +-1.
  for (double t2 : {0.0, kPi / 2, kPi, 10 * kPi}) {
    const auto [dx, dy] = het2::uncertainties(t2, p, 1.2, 0.0);
    CHECK(dx * dy == doctest::Approx(0.25).epsilon(1e-9));
  }
  const auto [dxq, dyq] = het2::uncertainties(kPi / 4, p, 1.2, 0.0);
  CHECK(dxq * dyq > 0.25 + 1e-3);
}

TEST_CASE("squeeze region") {
  const auto p = params(1.0, 0.01);
  CHECK(het2::squeeze_region(0.0, p, 0.5, 0.0) == het2::SqueezeRegion::XSqueezed);
  CHECK(het2::squeeze_region(0.0, p, 0.5, kPi) == het2::SqueezeRegion::YSqueezed);
  CHECK(het2::squeeze_region(0.0, p, 0.5, kPi / 2) == het2::SqueezeRegion::None);
  CHECK(het2::squeeze_region(1.0, p, 2.0, kPi / 2 + 2.0) == het2::SqueezeRegion::None);
  CHECK(het2::squeeze_region(0.0, p, 0.0, 0.0) == het2::SqueezeRegion::None);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> t(0.0, 200.0), rho(0.01, 8.0), th(-kPi, kPi);
  for (int i = 0; i < 10000; ++i) {
    const double tt = t(rng), r = rho(rng), th0 = th(rng);
    const auto region = het2::squeeze_region(tt, p, r, th0);
    const auto [dx, dy] = het2::uncertainties(tt, p, r, th0);
    CHECK((region == het2::SqueezeRegion::XSqueezed) == (dx < 0.5));
    CHECK((region == het2::SqueezeRegion::YSqueezed) == (dy < 0.5));
  }
}

TEST_CASE("vacuum approach") {
  const auto p = params(1.0, 0.01);
  for (double r : {0.5, 2.0, 8.0}) {
    const auto [dx, dy] = het2::uncertainties(2000.0, p, r, 0.0);
    CHECK(std::abs(dx - 0.5) < 1e-8);
    CHECK(std::abs(dy - 0.5) < 1e-8);
  }
}

TEST_CASE("alpha without squeezing is noise independent") {
  const auto p = params(1.0, 0.2);
  const TimeGrid g(2.0, 1e-3);
  const cplx a0{0.4, -0.3};
  const auto a = het2::alpha_trajectory(generate_path(g, NoiseKind::Complex, 1), p,
                                        SqueezeParam(0.0, 0.0), a0);
  const auto b = het2::alpha_trajectory(generate_path(g, NoiseKind::Complex, 2), p,
                                        SqueezeParam(0.0, 0.0), a0);
  CHECK(a == b);
  for (std::size_t k = 0; k <= g.n_steps(); k += 100) {
    const cplx expected = a0 * std::exp(-(kI * p.omega + p.mu / 2) * g.time(k));
    CHECK(std::abs(a[k] - expected) < 1e-13);
  }
  const auto zero = het2::alpha_trajectory(generate_path(g, NoiseKind::Complex, 1), p,
                                           SqueezeParam(0.0, 0.0), 0.0);
  for (const cplx& z : zero) CHECK(z == cplx{0, 0});
}

TEST_CASE("alpha matches Euler-Maruyama of its SDE") {
  const auto p = params(1.0, 0.5);
  const TimeGrid g(2.0, 1e-4);
  const SqueezeParam xi0(0.5, 0.7);
  const cplx a0{0.5, 0.2};
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto path = generate_path(g, NoiseKind::Complex, seed);
    const auto closed = het2::alpha_trajectory(path, p, xi0, a0);
    cplx alpha = a0;
    double worst = 0;
    for (std::size_t k = 0; k < g.n_steps(); ++k) {
      const double t = g.time(k);
      const auto s = het2::squeeze_at(t, p, xi0);
      const double sh = std::sinh(s.rho());
      alpha += (-(kI * p.omega + p.mu / 2) - p.mu * sh * sh) * alpha * g.dt() -
               std::sqrt(p.mu) * std::polar(sh, s.theta() - p.phase(t)) * path.increments[k];
      worst = std::max(worst, std::abs(alpha - closed[k + 1]));
    }
    CHECK(worst < 10 * g.dt());
  }
  CHECK_THROWS_AS(het2::alpha_trajectory(generate_path(g, NoiseKind::Real, 1), p, xi0, a0),
                  ConfigError);
}

TEST_CASE("l for the vacuum is the zero-point phase") {
  const auto p = params(1.0, 0.3);
  const TimeGrid g(3.0, 1e-3);
  const auto sol = het2::solve(generate_path(g, NoiseKind::Complex, 4), p, SqueezeParam(), 0.0);
  for (const auto& f : sol.frames) {
    CHECK(std::abs(f.record.l - std::exp(-kI * p.omega * f.t / 2.0)) < 1e-12);
  }
}

TEST_CASE("solution frames") {
  const auto p = params(1.0, 0.3);
  const TimeGrid g(1.0, 1e-3);
  const SqueezeParam xi0(0.8, 0.25);
  const auto sol = het2::solve(generate_path(g, NoiseKind::Complex, 4), p, xi0, {0.3, 0.1});
  REQUIRE(sol.frames.size() == g.n_steps() + 1);
  CHECK(sol.frames[0].record.l == cplx{1, 0});
  CHECK(sol.frames[0].record.alpha == cplx{0.3, 0.1});
  CHECK(sol.frames[0].record.squeeze.rho() == 0.8);
  for (std::size_t k = 1; k < sol.frames.size(); ++k) {
    CHECK(sol.frames[k].record.squeeze.rho() < sol.frames[k - 1].record.squeeze.rho());
    CHECK(sol.frames[k].record.squeeze.theta() == 0.25 - 2 * p.omega * g.time(k));
  }
}

TEST_CASE("full record reproduces the number-basis filter") {
  // Both sides carry O(sqrt(dt)) pathwise error, so the bound is 100 dt.
  const auto p = params(1.0, 0.1);
  const TimeGrid g(2.0, 1e-4);
  const SqueezeParam xi0(0.5, 0.3);
  const cplx a0{0.6, -0.4};
  const int n = fock::choose_cutoff(xi0, a0, 1e-14) + 10;
  const auto path = generate_path(g, NoiseKind::Complex, 12);
  const auto sol = het2::solve(path, p, xi0, a0);
  auto psi = fock::build_squeezed_coherent(xi0, a0, n);
  for (std::size_t k = 0; k < g.n_steps(); ++k) {
    fock::sde_step(psi, path.increments[k], g.dt(), g.time(k), p);
    if ((k + 1) % 2000 == 0) {
      const auto& f = sol.frames[k + 1];
      auto phi = fock::build_squeezed_coherent(f.record.squeeze, f.record.alpha, n,
                                               fock::SqueezeConstruction::NormalOrdered, 1.0);
      phi.amplitudes *= f.record.l;
      // Amplitude-level agreement checks the phase of l as well as |l|.
      CHECK((phi.amplitudes - psi.amplitudes).norm() < 100 * g.dt() * std::abs(f.record.l));
      const auto m = fock::quadrature_moments(psi);
      CHECK(std::abs(m.meanX - f.moments.meanX) < 100 * g.dt());
      CHECK(std::abs(m.dY - f.moments.dY) < 100 * g.dt());
    }
  }
}
