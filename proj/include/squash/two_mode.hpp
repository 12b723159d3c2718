#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <utility>

#include "squash/params.hpp"

namespace squash {

/// Driven atom + standing-wave model before the cavity is eliminated.
struct TwoModePhysical {
  double delta_b = 0.0;  // cavity detuning
  double delta_a = 0.0;  // vibrational detuning
  double G = 0.0;        // cross-Kerr rate
  std::complex<double> drive_a{0.0, 0.0};
  std::complex<double> drive_b{0.0, 0.0};
  double gamma = 1e-2;
  double kappa = 1e2;
  double nbar = 0.5;

  void validate() const;
};

struct FixedPoint {
  std::complex<double> alpha;
  std::complex<double> beta;
  double residual = 0.0;
  int iterations = 0;
  /// |alpha|^2 = delta_b/G - 1/2 and |beta|^2 = delta_a/G (effective detunings vanish).
  bool tuned = false;
};

/// Max modulus of the two semiclassical steady-state equations at (alpha, beta).
double semiclassical_residual(const TwoModePhysical& tp, std::complex<double> alpha, std::complex<double> beta);

/// Newton solve of the semiclassical steady-state equations. Starts from the G = 0 solution unless a guess
/// is given; the Kerr response can be multistable, so different starts may land on different branches.
FixedPoint semiclassical_fixed_point(const TwoModePhysical& tp,
                                     std::optional<std::pair<std::complex<double>, std::complex<double>>> guess = {});

/// Linear drift/diffusion on (X_a, P_a, X_b, P_b), with X = (c + c^dag)/2, P = (c - c^dag)/(2i).
struct TwoModeGaussian {
  Eigen::Matrix4d F;
  Eigen::Matrix4d D;
  Eigen::Matrix4d V;  // stationary covariance, filled by stationary_covariance
};

TwoModeGaussian assemble_drift_diffusion(const TwoModePhysical& tp, std::complex<double> alpha,
                                         std::complex<double> beta);

/// Same model for real amplitudes, parameterized directly by the signed coupling chi = -4 G |alpha| |beta|.
TwoModeGaussian assemble_from_rates(double gamma, double kappa, double chi_signed, double nbar);

/// Solves F V + V F^T + D = 0. Throws UnstableParameters if F is not Hurwitz.
Eigen::Matrix4d stationary_covariance(const Eigen::Matrix4d& F, const Eigen::Matrix4d& D);

double lyapunov_residual(const Eigen::Matrix4d& F, const Eigen::Matrix4d& D, const Eigen::Matrix4d& V);

struct AdiabaticReport {
  double var_x_two_mode = 0.0;
  double var_p_two_mode = 0.0;
  double var_x_reduced = 0.0;
  double var_p_reduced = 0.0;
  double rel_dev_x = 0.0;
  double rel_dev_p = 0.0;
  double bound_x = 0.0;  // gamma / kappa
  double bound_p = 0.0;  // chi^2 / kappa^2 + gamma / kappa
  bool regime_ok = false;      // kappa / chi >= 10
  bool within_bounds = false;  // only meaningful when regime_ok
};

/// Compares the two-mode stationary oscillator variances with the reduced model at g = 0.
AdiabaticReport adiabatic_check(const ModelParams& p);

}  // namespace squash
