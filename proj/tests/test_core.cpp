#include <doctest.h>

#include <cmath>
#include <random>

#include "sqfilter/core.hpp"
#include "sqfilter/fock.hpp"

using namespace sqf;

namespace {

// exp by Taylor series with argument halving, then tanh from it.
double series_exp(double x) {
  int halvings = 0;
  while (std::abs(x) > 0.5) {
    x /= 2;
    ++halvings;
  }
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 40; ++k) {
    term *= x / k;
    sum += term;
  }
  for (int i = 0; i < halvings; ++i) sum *= sum;
  return sum;
}

double series_tanh(double x) {
  const double e = series_exp(2 * x);
  return (e - 1) / (e + 1);
}

double series_artanh(double x) {
  double sum = 0.0, p = x;
  for (int k = 0; k < 400; ++k) {
    sum += p / (2 * k + 1);
    p *= x * x;
  }
  return sum;
}

}  // namespace

TEST_CASE("gamma from squeeze matches a series tanh") {
  CHECK(std::abs(gamma_from_squeeze(SqueezeParam(0.0, 2.3)).value()) == 0.0);
  const auto g05 = gamma_from_squeeze(SqueezeParam(0.5, 0.0)).value();
  CHECK(g05.real() == doctest::Approx(series_tanh(0.5)).epsilon(1e-14));
  CHECK(g05.real() == doctest::Approx(0.46211715726).epsilon(1e-10));
  CHECK(g05.imag() == 0.0);
  const auto g2 = gamma_from_squeeze(SqueezeParam(2.0, kPi / 2)).value();
  CHECK(std::abs(g2.real()) < 1e-15);
  CHECK(g2.imag() == doctest::Approx(series_tanh(2.0)).epsilon(1e-14));
  CHECK(g2.imag() == doctest::Approx(0.96402758008).epsilon(1e-10));
}

TEST_CASE("squeeze from gamma inverts tanh") {
  const auto zero = squeeze_from_gamma(GammaParam(cplx{0.0, 0.0}));
  CHECK(zero.rho() == 0.0);
  CHECK(zero.theta() == 0.0);

  const auto s = squeeze_from_gamma(GammaParam(cplx{0.46211715726000974, 0.0}));
  CHECK(s.rho() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.theta() == 0.0);

  const auto neg = squeeze_from_gamma(GammaParam(cplx{-0.5, 0.0}));
  CHECK(neg.rho() == doctest::Approx(series_artanh(0.5)).epsilon(1e-14));
  CHECK(neg.rho() == doctest::Approx(0.5493061443).epsilon(1e-9));
  CHECK(neg.theta() == doctest::Approx(kPi));

  CHECK_THROWS_AS(GammaParam(cplx{1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(GammaParam(cplx{0.6, 0.9}), ConfigError);
  CHECK_THROWS_AS(SqueezeParam(-0.1, 0.0), ConfigError);
}

TEST_CASE("squeeze and gamma round trip up to rho = 20") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rho(0.0, 20.0), theta(-3.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const SqueezeParam s(rho(rng), theta(rng));
    const auto back = squeeze_from_gamma(gamma_from_squeeze(s));
    CHECK(std::abs(back.rho() - s.rho()) <= 1e-12 * std::max(1.0, s.rho()));
    if (s.rho() > 0) CHECK(std::abs(wrap_angle(back.theta() - s.theta())) < 1e-12);
  }
  // Saturated tanh: the complement keeps rho = 8 and rho = 20 apart.
  const auto g20 = gamma_from_squeeze(SqueezeParam(20.0, 0.0));
  CHECK(g20.complement() > 0.0);
  CHECK(g20.complement() == doctest::Approx(2 * std::exp(-40.0)).epsilon(1e-12));
}

TEST_CASE("Bogoliubov accessors") {
  const auto g = gamma_from_squeeze(SqueezeParam(0.7, 0.4));
  CHECK(g.gamma1() == doctest::Approx(std::cosh(0.7)));
  CHECK(std::abs(g.gamma2() - std::polar(std::sinh(0.7), 0.4)) < 1e-14);
  CHECK(g.one_minus_abs2() == doctest::Approx(1.0 / std::pow(std::cosh(0.7), 2)));
}

TEST_CASE("kappa") {
  CHECK(std::abs(kappa(GammaParam(cplx{0.0, 0.0})) - cplx{1.0, 0.0}) < 1e-15);
  CHECK(kappa(GammaParam(cplx{std::tanh(0.5), 0.0})).real() ==
        doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(std::abs(kappa(GammaParam(cplx{0.0, 0.5})) - cplx{0.6, 0.8}) < 1e-15);
}

TEST_CASE("quadrature uncertainties against the kappa formulas") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r(0.0, 0.999), th(-kPi, kPi);
  for (int i = 0; i < 10000; ++i) {
    const GammaParam g(std::polar(r(rng), th(rng)));
    const cplx k = (1.0 + g.value()) / (1.0 - g.value());
    const double dx = 1.0 / std::sqrt(4 * k.real());
    const double dy = std::abs(k) * dx;
    const auto [ux, uy] = quadrature_uncertainties(g);
    CHECK(ux == doctest::Approx(dx).epsilon(1e-9));
    CHECK(uy == doctest::Approx(dy).epsilon(1e-9));
    CHECK(ux * uy >= 0.25 - 1e-12);
  }
}

TEST_CASE("moments from record") {
  const auto vac = moments_from_record({});
  CHECK(vac.meanX == 0.0);
  CHECK(vac.meanY == 0.0);
  CHECK(vac.dX == doctest::Approx(0.5));
  CHECK(vac.dY == doctest::Approx(0.5));

  const auto sq = moments_from_record({1.0, SqueezeParam(0.5, 0.0), 0.0});
  CHECK(sq.dX == doctest::Approx(std::exp(-0.5) / 2).epsilon(1e-14));
  CHECK(sq.dY == doctest::Approx(std::exp(0.5) / 2).epsilon(1e-14));
  CHECK(sq.dX == doctest::Approx(0.30327).epsilon(1e-5));
  CHECK(sq.dY == doctest::Approx(0.82436).epsilon(1e-5));

  const auto coh = moments_from_record({1.0, SqueezeParam(0.0, 0.0), cplx{1.0, 1.0}});
  CHECK(coh.meanX == doctest::Approx(1.0));
  CHECK(coh.meanY == doctest::Approx(1.0));

  // rho = 8 is outside any Fock cutoff; the stable form must still give e^{-8}/2.
  const auto big = moments_from_record({1.0, SqueezeParam(8.0, 0.0), 0.0});
  CHECK(big.dX == doctest::Approx(std::exp(-8.0) / 2).epsilon(1e-10));
  CHECK(big.dY == doctest::Approx(std::exp(8.0) / 2).epsilon(1e-10));
}

TEST_CASE("uncertainty product is minimal iff gamma is real") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rho(0.0, 3.0), th(-kPi, kPi), a(-2.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const double theta = (i % 4 == 0) ? kPi * (i % 8 == 0) : th(rng);
    const SqueezedCoherentRecord r{1.0, SqueezeParam(rho(rng), theta), cplx{a(rng), a(rng)}};
    const auto m = moments_from_record(r);
    const double prod = m.dX * m.dY;
    CHECK(prod >= 0.25 - 1e-12);
    const double im_gamma = gamma_from_squeeze(r.squeeze).value().imag();
    if (std::abs(im_gamma) < 1e-14) CHECK(prod == doctest::Approx(0.25).epsilon(1e-9));
    if (std::abs(im_gamma) > 1e-3) CHECK(prod > 0.25 + 1e-9);
  }
}

TEST_CASE("moments agree with number-basis expectations") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> rho(0.0, 2.0), th(-kPi, kPi), a(-1.4, 1.4);
  for (int i = 0; i < 12; ++i) {
    const SqueezeParam xi(rho(rng), th(rng));
    const cplx alpha{a(rng), a(rng)};
    const int n = fock::choose_cutoff(xi, alpha, 1e-14);
    const auto psi = fock::build_squeezed_coherent(xi, alpha, n, fock::SqueezeConstruction::NormalOrdered, 1e-14);
    const auto numeric = fock::quadrature_moments(psi);
    const auto analytic = moments_from_record({1.0, xi, alpha});
    CHECK(numeric.meanX == doctest::Approx(analytic.meanX).epsilon(1e-8));
    CHECK(std::abs(numeric.meanY - analytic.meanY) < 1e-8);
    CHECK(std::abs(numeric.dX - analytic.dX) < 1e-8);
    CHECK(std::abs(numeric.dY - analytic.dY) < 1e-8);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((ModelParams{0.0, 0.1}.validate()), ConfigError);
  CHECK_THROWS_AS((ModelParams{1.0, -0.1}.validate()), ConfigError);
  CHECK_NOTHROW((ModelParams{1.0, 0.1}.validate()));
  CHECK(scheme_from_string("single") == Scheme::SingleHeterodyne);
  CHECK(scheme_from_string(to_string(Scheme::DoubleHeterodyne)) == Scheme::DoubleHeterodyne);
  CHECK_THROWS_AS(scheme_from_string("homodyne"), ConfigError);
  CHECK(SqueezeParam(0.0, 1.7).theta() == 0.0);
  CHECK(SqueezeParam(0.3, -9.0).theta() == -9.0);
  CHECK(SqueezeParam(0.3, -9.0).wrapped_theta() == doctest::Approx(-9.0 + 2 * kPi));
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK_THROWS_AS(require_finite(std::nan(""), "x"), NumericError);
}
