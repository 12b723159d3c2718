#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "squash/errors.hpp"
#include "squash/params.hpp"

using namespace squash;

namespace {

ModelParams fig2() { return ModelParams{}; }

oracle::Rates rates(const ModelParams& p) {
  return {p.gamma, p.kappa, p.chi, p.g, std::sin(p.phi), std::cos(p.phi), p.eta, p.nbar};
}

}  // namespace

TEST_CASE("defaults are the figure parameters") {
  const ModelParams p;
  CHECK(p.gamma == 1e-2);
  CHECK(p.kappa == 1e2);
  CHECK(p.chi == 2.5);
  CHECK(p.g == 0.025);
  CHECK(p.eta == 0.8);
  CHECK(p.nbar == 0.5);
  CHECK(p.sin_phi() == -1.0);
  CHECK(p.cos_phi() == 0.0);
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("validate rejects out-of-domain inputs") {
  auto bad = [](auto mutate) {
    ModelParams p;
    mutate(p);
    return p;
  };
  CHECK_THROWS_AS(bad([](ModelParams& p) { p.gamma = 0; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ModelParams& p) { p.kappa = -1; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ModelParams& p) { p.chi = -0.1; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ModelParams& p) { p.eta = 0; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ModelParams& p) { p.eta = 1.01; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ModelParams& p) { p.nbar = -0.1; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ModelParams& p) { p.gamma = std::nan(""); }).validate(), DomainError);
  CHECK_NOTHROW(bad([](ModelParams& p) { p.eta = 1.0; }).validate());
}

TEST_CASE("phase helpers are exact at quarter turns") {
  const double pi = 3.14159265358979323846;
  CHECK(sin_cos_phase(-pi / 2) == std::pair<double, double>(-1.0, 0.0));
  CHECK(sin_cos_phase(pi / 2) == std::pair<double, double>(1.0, 0.0));
  CHECK(sin_cos_phase(pi) == std::pair<double, double>(0.0, -1.0));
  CHECK(sin_cos_phase(0.0) == std::pair<double, double>(0.0, 1.0));
  const auto [s, c] = sin_cos_phase(0.3);
  CHECK(s == doctest::Approx(std::sin(0.3)).epsilon(1e-15));
  CHECK(c == doctest::Approx(std::cos(0.3)).epsilon(1e-15));
}

TEST_CASE("derive_couplings") {
  PhysicalInputs in{1e6, 1e-2, 1e9, 1.25, 2.5};
  const Couplings c = derive_couplings(in);
  CHECK(c.G == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(c.chi == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(c.chi_signed() == doctest::Approx(-2.5).epsilon(1e-14));

  in.k_x0 = 0;
  CHECK(derive_couplings(in).G == 0.0);
  CHECK(derive_couplings(in).chi == 0.0);

  in.k_x0 = 2e-2;
  CHECK(derive_couplings(in).G == doctest::Approx(4 * c.G).epsilon(1e-14));

  in.delta = 0;
  CHECK_THROWS_AS(derive_couplings(in), DomainError);
  in.delta = -1;
  CHECK_THROWS_AS(derive_couplings(in), DomainError);
}

TEST_CASE("effective bath at g = 0") {
  ModelParams p = fig2();
  p.g = 0;
  const EffectiveBath b = effective_bath(p);
  CHECK(b.Gamma == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(b.N == doctest::Approx(2.0625).epsilon(1e-14));
  CHECK(b.M.real() == doctest::Approx(-1.5625).epsilon(1e-14));
  CHECK(b.M.imag() == 0.0);

  // exact collapse for any phase and chi
  for (double phi : {0.0, 0.7, -2.1}) {
    for (double chi : {0.1, 1.0, 7.0}) {
      p.phi = phi;
      p.chi = chi;
      const EffectiveBath e = effective_bath(p);
      const double m = chi * chi / (4 * p.kappa * p.gamma);
      CHECK(e.N == doctest::Approx(p.nbar + m).epsilon(1e-15));
      CHECK(e.M.real() == doctest::Approx(-m).epsilon(1e-15));
      CHECK(e.M.imag() == 0.0);
    }
  }

  p.chi = 1e-9;
  const EffectiveBath t = effective_bath(p);
  CHECK(t.N == doctest::Approx(p.nbar).epsilon(1e-12));
  CHECK(std::abs(t.M) < 1e-12);
}

TEST_CASE("effective bath at the figure 2 point") {
  const ModelParams p = fig2();
  const EffectiveBath b = effective_bath(p);
  CHECK(b.Gamma == doctest::Approx(0.035).epsilon(1e-14));
  CHECK(b.N == doctest::Approx(0.32142857142857142).epsilon(1e-12));
  CHECK(b.M.real() == doctest::Approx(-0.35714285714285714).epsilon(1e-12));
  CHECK(std::abs(b.M.imag()) < 1e-15);
  CHECK(b.is_physical());

  const oracle::Bath o = oracle::bath(rates(p));
  CHECK(b.N == doctest::Approx(o.N).epsilon(1e-14));
  CHECK(b.M.real() == doctest::Approx(o.M.real()).epsilon(1e-14));
}

TEST_CASE("effective bath matches the oracle for random phases") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    ModelParams p;
    p.gamma = 1e-3 + 0.1 * u(rng);
    p.kappa = 10 + 500 * u(rng);
    p.chi = 0.1 + 5 * u(rng);
    p.g = 0.1 * u(rng);
    p.phi = 6.283 * u(rng);
    p.eta = 0.05 + 0.95 * u(rng);
    p.nbar = 3 * u(rng);
    if (std::abs(p.gamma - p.g * std::sin(p.phi)) < 1e-6) continue;
    const EffectiveBath b = effective_bath(p);
    const oracle::Bath o = oracle::bath(rates(p));
    CHECK(b.Gamma == doctest::Approx(o.Gamma).epsilon(1e-12));
    CHECK(b.N == doctest::Approx(o.N).epsilon(1e-12));
    CHECK(std::abs(b.M - o.M) <= 1e-12 * (1 + std::abs(o.M)));
  }
}

TEST_CASE("effective bath errors") {
  ModelParams p = fig2();
  p.phi = 3.14159265358979323846 / 2;
  p.g = p.gamma;
  CHECK_THROWS_AS(effective_bath(p), SingularParameters);

  p = fig2();
  p.chi = 0;
  CHECK_THROWS_AS(effective_bath(p), DomainError);
  p.g = 0;
  CHECK_NOTHROW(effective_bath(p));
}

TEST_CASE("stable sets have positive damping and N + 1/2 > 0") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  int n = 0;
  while (n < 2000) {
    ModelParams p;
    p.gamma = 1e-3 + 0.1 * u(rng);
    p.chi = 0.1 + 5 * u(rng);
    p.g = 0.2 * u(rng);
    p.phi = 6.283 * u(rng);
    p.eta = 0.05 + 0.95 * u(rng);
    p.nbar = 3 * u(rng);
    if (p.feedback_drift() >= p.gamma / 2) continue;
    ++n;
    const EffectiveBath b = effective_bath(p);
    CHECK(b.Gamma > 0);
    CHECK(b.N + 0.5 > 0);
    CHECK(b.is_physical());
  }
}

TEST_CASE("non-physical bath is flagged") {
  EffectiveBath b;
  b.Gamma = 1;
  b.N = 0.1;
  b.M = {1.0, 0.0};
  CHECK_FALSE(b.is_physical());
  CHECK_THROWS_AS(require_physical(b), NonPhysicalBath);
  b.M = {0.0, std::sqrt(0.11)};
  CHECK(b.is_physical());
  CHECK_NOTHROW(require_physical(b));
}

TEST_CASE("check_regime") {
  ModelParams p = fig2();
  RegimeReport r = check_regime(p);
  CHECK(r.stability.state == CheckState::pass);
  CHECK(r.adiabatic.state == CheckState::pass);
  CHECK(r.adiabatic.ratio == doctest::Approx(40.0));
  CHECK(r.stability.ratio == doctest::Approx(-5.0));
  CHECK(r.lamb_dicke.state == CheckState::not_evaluated);
  CHECK(r.semiclassical.state == CheckState::not_evaluated);
  CHECK(r.bath_physical);

  p.phi = 3.14159265358979323846 / 2;
  r = check_regime(p);
  CHECK(r.stability.state == CheckState::fail);
  CHECK(r.damping_positive.state == CheckState::fail);

  p.g = 0;
  CHECK(check_regime(p).stability.state == CheckState::pass);

  p = fig2();
  p.kappa = 5;
  CHECK(check_regime(p).adiabatic.state == CheckState::fail);

  PhysicalInputs phys{1e6, 1e-3, 1e9, 20, 15};
  r = check_regime(fig2(), phys);
  CHECK(r.lamb_dicke.state == CheckState::pass);
  CHECK(r.lamb_dicke.ratio == doctest::Approx(0.02));
  CHECK(r.semiclassical.state == CheckState::pass);
  phys.beta_mag = 2;
  phys.alpha_mag = 200;
  r = check_regime(fig2(), phys);
  CHECK(r.lamb_dicke.state == CheckState::fail);
  CHECK(r.semiclassical.state == CheckState::fail);

  RegimeThresholds loose;
  loose.adiabatic_ratio = 50;
  CHECK(check_regime(fig2(), std::nullopt, loose).adiabatic.state == CheckState::fail);
}
