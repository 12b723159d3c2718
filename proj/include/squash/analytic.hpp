#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "squash/params.hpp"

namespace squash {

/// Stationary normally ordered characteristic function
///   C(lambda) = exp(-zeta |lambda|^2 + mu (lambda*)^2 / 2 + mu* lambda^2 / 2),
/// i.e. zeta = <a^dag a>, mu = <a^2> for the zero-mean stationary state.
struct StationaryGaussian {
  double zeta = 0.0;
  std::complex<double> mu{0.0, 0.0};
};

/// Symmetric covariance of (X_0, X_{pi/2}); vacuum is diag(1/4, 1/4).
struct QuadCovariance {
  double vxx = 0.25;
  double vpp = 0.25;
  double vxp = 0.0;

  double det() const { return vxx * vpp - vxp * vxp; }
  Eigen::Matrix2d matrix() const;
};

/// The 1/sqrt(e) level set of the Gaussian Wigner function.
struct ContourEllipse {
  double semi_axis_major = 0.0;
  double semi_axis_minor = 0.0;
  double angle = 0.0;  // major-axis direction in (-pi/2, pi/2]
};

/// True iff the moment dynamics are Hurwitz: g sin(phi) < gamma / 2.
///
/// The second-moment drift of the feedback master equation has eigenvalues -gamma and
/// -gamma + 2 g sin(phi). Gamma > 0 alone is not sufficient.
bool is_stable(const ModelParams& p);

/// Human-readable statement of the violated inequality, empty when stable.
std::string instability_reason(const ModelParams& p);

/// Throws UnstableParameters with the violated inequality.
void require_stable(const ModelParams& p);

/// Closed-form zeta and mu of the stationary state.
///
/// `nu` is the coefficient multiplying Im{M} in the printed zeta numerator; its identity is
/// unknown and the stationary moments of the master equation require nu = 0.
StationaryGaussian stationary_solution(const ModelParams& p, double nu = 0.0);

/// Var(X_theta) = (1/2) [1/2 + zeta + Re(mu e^{2 i theta})].
double quad_variance(const StationaryGaussian& s, double theta);

/// zeta + Re(mu); Var(X_0) = (1/2)(1/2 + n_eff).
double n_eff(const ModelParams& p);

QuadCovariance covariance(const StationaryGaussian& s);

ContourEllipse contour_ellipse(const QuadCovariance& c);

struct PhaseGrid {
  double x_min = -3.0, x_max = 3.0;
  int nx = 121;
  double p_min = -3.0, p_max = 3.0;
  int np = 121;

  double x(int i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1); }
  double p(int j) const { return np == 1 ? p_min : p_min + (p_max - p_min) * j / (np - 1); }
};

/// Zero-mean Gaussian Wigner function W(x, p) on the grid; rows index x, columns index p.
Eigen::MatrixXd wigner_gaussian(const QuadCovariance& c, const PhaseGrid& grid);

/// Single-point evaluation.
double wigner_gaussian(const QuadCovariance& c, double x, double p);

}  // namespace squash
