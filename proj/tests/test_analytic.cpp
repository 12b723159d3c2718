#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "squash/analytic.hpp"
#include "squash/errors.hpp"

using namespace squash;
using std::numbers::pi;

namespace {

oracle::Rates rates(const ModelParams& p) {
  return {p.gamma, p.kappa, p.chi, p.g, std::sin(p.phi), std::cos(p.phi), p.eta, p.nbar};
}

ModelParams random_stable(std::mt19937_64& rng, bool quarter_phase) {
  std::uniform_real_distribution<double> u(0, 1);
  for (;;) {
    ModelParams p;
    p.gamma = 1e-3 + 0.1 * u(rng);
    p.kappa = 10 + 500 * u(rng);
    p.chi = 0.1 + 5 * u(rng);
    p.g = 0.2 * u(rng);
    p.phi = quarter_phase ? (u(rng) < 0.5 ? -pi / 2 : pi / 2) : 2 * pi * u(rng);
    p.eta = 0.05 + 0.95 * u(rng);
    p.nbar = 3 * u(rng);
    if (2 * p.feedback_drift() < 0.99 * p.gamma) return p;
  }
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("no feedback reduces to the bath moments") {
  ModelParams p;
  p.g = 0;
  const StationaryGaussian s = stationary_solution(p);
  const EffectiveBath b = effective_bath(p);
  CHECK(s.zeta == b.N);
  CHECK(s.mu == b.M);
  CHECK(s.zeta == doctest::Approx(2.0625).epsilon(1e-14));
  CHECK(s.mu.real() == doctest::Approx(-1.5625).epsilon(1e-14));
  CHECK(n_eff(p) == doctest::Approx(p.nbar).epsilon(1e-14));
}

TEST_CASE("figure 2 stationary moments") {
  const ModelParams p;
  const StationaryGaussian s = stationary_solution(p);
  CHECK(s.zeta == doctest::Approx(1.6979166666666667).epsilon(1e-12));
  CHECK(s.mu.real() == doctest::Approx(-1.9270833333333333).epsilon(1e-12));
  CHECK(s.mu.imag() == 0.0);
  // printed rounding
  CHECK(std::abs(s.zeta - 1.697916) < 1e-6);
  CHECK(std::abs(s.mu.real() + 1.927083) < 1e-6);

  const Eigen::Vector3d o = oracle::moment_stationary(rates(p));
  CHECK(rel(s.zeta, o[0]) < 1e-10);
  CHECK(rel(s.mu.real(), o[1]) < 1e-10);

  CHECK(quad_variance(s, 0) == doctest::Approx(0.13541666666666667).epsilon(1e-12));
  CHECK(quad_variance(s, pi / 2) == doctest::Approx(2.0625).epsilon(1e-12));
  CHECK(n_eff(p) == doctest::Approx(-0.22916666666666667).epsilon(1e-12));
}

TEST_CASE("quadrature variance of vacuum") {
  const StationaryGaussian vac;
  for (double th : {0.0, 0.3, 1.0, pi / 2, 2.5}) CHECK(quad_variance(vac, th) == doctest::Approx(0.25));
}

TEST_CASE("figure 1 trend") {
  ModelParams p;
  const double expect[] = {2.2708, -0.0440, -0.2292};
  double prev = INFINITY;
  int i = 0;
  for (double chi : {0.5, 1.5, 2.5}) {
    p.chi = chi;
    const double n = n_eff(p);
    CHECK(std::abs(n - expect[i++]) < 1e-4);
    CHECK(n < prev);
    prev = n;
  }
}

TEST_CASE("stability") {
  ModelParams p;
  CHECK(is_stable(p));
  CHECK(instability_reason(p).empty());
  p.g = 0;
  CHECK(is_stable(p));
  p.g = 0.025;
  p.phi = pi / 2;
  CHECK_FALSE(is_stable(p));
  CHECK_FALSE(instability_reason(p).empty());
  CHECK_THROWS_AS(require_stable(p), UnstableParameters);
  CHECK_THROWS_AS(stationary_solution(p), UnstableParameters);
  CHECK_THROWS_AS(n_eff(p), UnstableParameters);

  // the boundary itself is unstable
  p.g = p.gamma / 2;
  CHECK_FALSE(is_stable(p));
  p.g = 0.999 * p.gamma / 2;
  CHECK(is_stable(p));
}

TEST_CASE("slowest moment rate sets the stability edge") {
  // Between gamma/2 and gamma the effective damping is still positive but the moments diverge.
  ModelParams p;
  p.phi = pi / 2;
  p.g = 0.75 * p.gamma;
  CHECK(effective_bath(p).Gamma > 0);
  const oracle::MomentOde o = oracle::moment_ode(rates(p));
  CHECK(o.A.eigenvalues().real().maxCoeff() > 0);
  CHECK_FALSE(is_stable(p));
}

TEST_CASE("covariance") {
  const StationaryGaussian fig{1.6979166666666667, {-1.9270833333333333, 0.0}};
  const QuadCovariance c = covariance(fig);
  CHECK(c.vxx == doctest::Approx(0.13541666666666667).epsilon(1e-12));
  CHECK(c.vpp == doctest::Approx(2.0625).epsilon(1e-12));
  CHECK(c.vxp == 0.0);

  const QuadCovariance v = covariance(StationaryGaussian{});
  CHECK(v.vxx == 0.25);
  CHECK(v.vpp == 0.25);
  CHECK(v.vxp == 0.0);
  CHECK(v.det() == doctest::Approx(1.0 / 16));

  const StationaryGaussian tilt{0.4, {0.0, 0.3}};
  const QuadCovariance t = covariance(tilt);
  CHECK(t.vxx == doctest::Approx(t.vpp));
  CHECK(t.vxp == doctest::Approx(-0.15));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 50; ++i) {
    const StationaryGaussian s{1.0 + u(rng) * 0.5, {0.6 * u(rng), 0.6 * u(rng)}};
    const QuadCovariance q = covariance(s);
    for (double th = 0; th < pi; th += 0.1) {
      const double recon = q.vxx * std::cos(th) * std::cos(th) + q.vpp * std::sin(th) * std::sin(th) +
                           q.vxp * std::sin(2 * th);
      CHECK(recon == doctest::Approx(quad_variance(s, th)).epsilon(1e-13));
    }
  }

  CHECK_THROWS_AS(covariance(StationaryGaussian{-0.5, {0.0, 0.0}}), DomainError);
  CHECK_THROWS_AS(covariance(StationaryGaussian{0.0, {1.0, 0.0}}), DomainError);
}

TEST_CASE("contour ellipse") {
  const ContourEllipse e = contour_ellipse(QuadCovariance{0.13541666666666667, 2.0625, 0});
  CHECK(e.semi_axis_major == doctest::Approx(1.43614066).epsilon(1e-8));
  CHECK(e.semi_axis_minor == doctest::Approx(0.36799004).epsilon(1e-7));
  CHECK(e.angle == doctest::Approx(pi / 2).epsilon(1e-14));

  const ContourEllipse v = contour_ellipse(QuadCovariance{});
  CHECK(v.semi_axis_major == doctest::Approx(0.5));
  CHECK(v.semi_axis_minor == doctest::Approx(0.5));
  CHECK(v.angle == 0.0);

  ModelParams p;
  p.g = 0;
  const ContourEllipse m = contour_ellipse(covariance(stationary_solution(p)));
  CHECK(m.semi_axis_major == doctest::Approx(1.43614066).epsilon(1e-8));
  CHECK(m.semi_axis_minor == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(m.angle == doctest::Approx(pi / 2));

  const ContourEllipse t = contour_ellipse(covariance(StationaryGaussian{0.4, {0.0, 0.3}}));
  CHECK(t.semi_axis_major >= t.semi_axis_minor);
  CHECK(t.angle > -pi / 2);
  CHECK(t.angle <= pi / 2);
  CHECK(std::abs(std::abs(t.angle) - pi / 4) < 1e-12);

  CHECK_THROWS_AS(contour_ellipse(QuadCovariance{0.25, 0.25, 0.25}), DomainError);
}

TEST_CASE("variance extrema lie on the ellipse axes") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const ModelParams p = random_stable(rng, false);
    const StationaryGaussian s = stationary_solution(p);
    const ContourEllipse e = contour_ellipse(covariance(s));
    // the quadrature X_theta is the phase-space direction (cos theta, sin theta)
    CHECK(quad_variance(s, e.angle) == doctest::Approx(e.semi_axis_major * e.semi_axis_major).epsilon(1e-10));
    CHECK(quad_variance(s, e.angle + pi / 2) ==
          doctest::Approx(e.semi_axis_minor * e.semi_axis_minor).epsilon(1e-10));
    for (double th = 0; th < pi; th += 0.05) {
      CHECK(quad_variance(s, th) <= e.semi_axis_major * e.semi_axis_major * (1 + 1e-12));
      CHECK(quad_variance(s, th) >= e.semi_axis_minor * e.semi_axis_minor * (1 - 1e-12));
      CHECK(quad_variance(s, th + pi) == doctest::Approx(quad_variance(s, th)).epsilon(1e-12));
    }
  }
}

TEST_CASE("wigner function") {
  CHECK(wigner_gaussian(QuadCovariance{}, 0, 0) == doctest::Approx(0.6366197723675814).epsilon(1e-14));
  const QuadCovariance fig{0.13541666666666667, 2.0625, 0};
  CHECK(wigner_gaussian(fig, 0, 0) == doctest::Approx(0.30116).epsilon(2e-5));

  const QuadCovariance tilted = covariance(StationaryGaussian{0.7, {0.2, -0.3}});
  const ContourEllipse e = contour_ellipse(tilted);
  const double w0 = wigner_gaussian(tilted, 0, 0);
  for (double t = 0; t < 2 * pi; t += 0.4) {
    const double u = e.semi_axis_major * std::cos(t), v = e.semi_axis_minor * std::sin(t);
    const double x = u * std::cos(e.angle) - v * std::sin(e.angle);
    const double y = u * std::sin(e.angle) + v * std::cos(e.angle);
    CHECK(wigner_gaussian(tilted, x, y) == doctest::Approx(w0 / std::sqrt(std::exp(1.0))).epsilon(1e-12));
  }

  PhaseGrid g{-8, 8, 321, -8, 8, 321};
  const Eigen::MatrixXd w = wigner_gaussian(fig, g);
  CHECK(w.rows() == 321);
  CHECK(w.cols() == 321);
  const double h = 16.0 / 320;
  CHECK(w.sum() * h * h == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(w(160, 160) == doctest::Approx(wigner_gaussian(fig, 0, 0)));
  CHECK(w(200, 100) == doctest::Approx(wigner_gaussian(fig, g.x(200), g.p(100))));

  CHECK_THROWS_AS(wigner_gaussian(QuadCovariance{0.25, 0.25, 0.25}, 0, 0), DomainError);
}

TEST_CASE("closed form equals the moment-equation oracle") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 300; ++i) {
    const ModelParams p = random_stable(rng, i % 2 == 0);
    const StationaryGaussian s = stationary_solution(p);
    const Eigen::Vector3d o = oracle::moment_stationary(rates(p));
    const double scale = std::max({std::abs(o[0]), std::abs(o[1]), std::abs(o[2])});
    CHECK(std::abs(s.zeta - o[0]) <= 1e-10 * scale);
    CHECK(std::abs(s.mu.real() - o[1]) <= 1e-10 * scale);
    CHECK(std::abs(s.mu.imag() - o[2]) <= 1e-10 * scale);
  }
}

TEST_CASE("the unknown coefficient only enters away from quarter phases") {
  ModelParams p;
  CHECK(stationary_solution(p, 3.0).zeta == stationary_solution(p, 0.0).zeta);
  p.phi = -1.2;
  CHECK(stationary_solution(p, 3.0).zeta != doctest::Approx(stationary_solution(p, 0.0).zeta));
}

TEST_CASE("orthogonal quadrature does not depend on the gain") {
  ModelParams p;
  const double target = 0.5 * (0.5 + p.nbar + p.chi * p.chi / (2 * p.kappa * p.gamma));
  for (double g : {0.0, 0.01, 0.0125, 0.025}) {
    p.g = g;
    CHECK(rel(quad_variance(stationary_solution(p), pi / 2), target) < 1e-12);
  }
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    ModelParams q = random_stable(rng, true);
    const double t = 0.5 * (0.5 + q.nbar + q.chi * q.chi / (2 * q.kappa * q.gamma));
    CHECK(rel(quad_variance(stationary_solution(q), pi / 2), t) < 1e-12);
  }
}

TEST_CASE("bounds over random stable sets") {
  std::mt19937_64 rng(19);
  double worst_n = INFINITY, worst_det = INFINITY;
  for (int i = 0; i < 20000; ++i) {
    const ModelParams p = random_stable(rng, i % 3 != 0);
    const StationaryGaussian s = stationary_solution(p);
    worst_n = std::min(worst_n, s.zeta + s.mu.real());
    worst_det = std::min(worst_det, covariance(s).det());
  }
  CHECK(worst_n >= -0.5);
  CHECK(worst_det >= (1.0 / 16) * (1 - 1e-12));
}

TEST_CASE("no-feedback identity holds for any phase and rates") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    ModelParams p = random_stable(rng, false);
    p.g = 0;
    CHECK(rel(n_eff(p), p.nbar) <= 1e-12);
  }
}
