#include "squash/analytic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "squash/errors.hpp"
#include "squash/log.hpp"

namespace squash {

bool is_stable(const ModelParams& p) { return 2.0 * p.feedback_drift() < p.gamma; }

std::string instability_reason(const ModelParams& p) {
  if (is_stable(p)) return {};
  std::ostringstream os;
  os.precision(12);
  os << "unstable: g sin(phi) = " << p.feedback_drift() << " must be < gamma/2 = " << 0.5 * p.gamma;
  return os.str();
}

void require_stable(const ModelParams& p) {
  if (!is_stable(p)) throw UnstableParameters(instability_reason(p));
}

StationaryGaussian stationary_solution(const ModelParams& p, double nu) {
  require_stable(p);
  const EffectiveBath bath = effective_bath(p);
  if (!bath.is_physical()) {
    warn("effective bath violates |M|^2 <= N(N+1); stationary formulas evaluated anyway");
  }
  const double G = bath.Gamma;
  const double s = p.feedback_drift();
  const double denom = G * G - s * s;
  if (denom == 0.0) throw SingularParameters("Gamma^2 - (g sin phi)^2 vanishes");

  StationaryGaussian out;
  out.zeta = (bath.N * G * G + s * (G * bath.M.real() + 2.0 * nu * bath.M.imag()) + 0.5 * s * s) / denom;
  const double mu_re = G * ((bath.N + 0.5) * s + G * bath.M.real()) / denom;
  const double mu_im = denom * bath.M.imag() / denom;
  out.mu = {mu_re, mu_im};
  return out;
}

double quad_variance(const StationaryGaussian& s, double theta) {
  const std::complex<double> rot = std::polar(1.0, 2.0 * theta);
  return 0.5 * (0.5 + s.zeta + (s.mu * rot).real());
}

double n_eff(const ModelParams& p) {
  const StationaryGaussian s = stationary_solution(p);
  return s.zeta + s.mu.real();
}

Eigen::Matrix2d QuadCovariance::matrix() const {
  Eigen::Matrix2d m;
  m << vxx, vxp, vxp, vpp;
  return m;
}

QuadCovariance covariance(const StationaryGaussian& s) {
  QuadCovariance c;
  c.vxx = 0.5 * (0.5 + s.zeta + s.mu.real());
  c.vpp = 0.5 * (0.5 + s.zeta - s.mu.real());
  c.vxp = -0.5 * s.mu.imag();
  if (!(c.vxx > 0 && c.vpp > 0 && c.det() > 0)) {
    std::ostringstream os;
    os << "covariance is not positive definite (vxx=" << c.vxx << ", vpp=" << c.vpp << ", vxp=" << c.vxp << ")";
    throw DomainError(os.str());
  }
  return c;
}

namespace {

void require_positive_definite(const QuadCovariance& c) {
  if (!(c.vxx > 0 && c.vpp > 0 && c.det() > 0)) throw DomainError("degenerate or indefinite covariance");
}

}  // namespace

ContourEllipse contour_ellipse(const QuadCovariance& c) {
  require_positive_definite(c);
  // Closed-form 2x2 symmetric eigenproblem.
  const double mean = 0.5 * (c.vxx + c.vpp);
  const double half_diff = 0.5 * (c.vxx - c.vpp);
  const double radius = std::hypot(half_diff, c.vxp);
  const double lmax = mean + radius;
  const double lmin = mean - radius;
  if (!(lmin > 0)) throw DomainError("degenerate covariance");

  ContourEllipse e;
  e.semi_axis_major = std::sqrt(lmax);
  e.semi_axis_minor = std::sqrt(lmin);
  if (radius <= 1e-15 * mean) {
    e.angle = 0.0;
  } else {
    double angle = 0.5 * std::atan2(2.0 * c.vxp, c.vxx - c.vpp);  // in (-pi/2, pi/2]
    if (angle <= -std::numbers::pi / 2) angle += std::numbers::pi;
    e.angle = angle;
  }
  return e;
}

double wigner_gaussian(const QuadCovariance& c, double x, double p) {
  require_positive_definite(c);
  const double det = c.det();
  const double quad = (c.vpp * x * x - 2.0 * c.vxp * x * p + c.vxx * p * p) / det;
  return std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));
}

Eigen::MatrixXd wigner_gaussian(const QuadCovariance& c, const PhaseGrid& grid) {
  require_positive_definite(c);
  Eigen::MatrixXd w(grid.nx, grid.np);
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.np; ++j) w(i, j) = wigner_gaussian(c, grid.x(i), grid.p(j));
  }
  return w;
}

}  // namespace squash
