#pragma once

#include <complex>
#include <optional>
#include <string>

namespace squash {

/// Rates and phases of the reduced (cavity-eliminated) oscillator model.
///
/// All rates are in s^-1. Quadratures follow X_theta = (a e^{i theta} + a^dag e^{-i theta}) / 2,
/// so the vacuum variance is 1/4.
struct ModelParams {
  double gamma = 1e-2;   // vibrational damping
  double kappa = 1e2;    // cavity decay
  double chi = 2.5;      // |effective QND coupling|
  double g = 0.025;      // feedback gain
  double phi = -1.5707963267948966;  // local-oscillator phase
  double eta = 0.8;      // detection efficiency
  double nbar = 0.5;     // thermal phonon number

  /// Throws DomainError if an invariant is violated.
  void validate() const;

  double sin_phi() const;
  double cos_phi() const;
  /// g sin(phi), the parametric/feedback drift rate that appears everywhere.
  double feedback_drift() const { return g * sin_phi(); }
  /// Measurement strength chi^2 / kappa.
  double measurement_rate() const { return chi * chi / kappa; }
};

/// sin/cos that return exact 0, +-1 when phi is a multiple of pi/2 to within rounding.
std::pair<double, double> sin_cos_phase(double phi);

/// Upstream quantities of the un-eliminated atom + standing-wave model.
struct PhysicalInputs {
  double epsilon = 0.0;    // atom-field coupling (s^-1)
  double k_x0 = 0.0;       // Lamb-Dicke parameter
  double delta = 1.0;      // atomic detuning (s^-1)
  double alpha_mag = 1.0;  // |alpha|
  double beta_mag = 1.0;   // |beta|
};

struct Couplings {
  double G = 0.0;            // cross-Kerr rate
  double chi = 0.0;          // |chi| = 4 G |alpha| |beta|
  bool chi_negative = true;  // the signed coupling is -4 G |alpha| |beta|

  double chi_signed() const { return chi_negative ? -chi : chi; }
};

Couplings derive_couplings(const PhysicalInputs& p);

/// Coefficients (Gamma, N, M) of the squeezed-bath form of the feedback master equation.
struct EffectiveBath {
  double Gamma = 0.0;
  double N = 0.0;
  std::complex<double> M{0.0, 0.0};

  /// |M|^2 <= N (N + 1), up to a relative tolerance.
  bool is_physical(double rel_tol = 1e-12) const;
};

EffectiveBath effective_bath(const ModelParams& p);

/// Throws NonPhysicalBath naming the violated inequality.
void require_physical(const EffectiveBath& bath);

struct RegimeThresholds {
  double adiabatic_ratio = 10.0;  // kappa / chi >= this
  double lamb_dicke_max = 0.1;    // k_x0 |alpha| <= this
  double large_amplitude = 10.0;  // |alpha|, |beta| >= this
};

enum class CheckState { pass, fail, not_evaluated };

std::string to_string(CheckState s);

struct RegimeCheck {
  CheckState state = CheckState::not_evaluated;
  double ratio = 0.0;
};

struct RegimeReport {
  RegimeCheck adiabatic;      // ratio = kappa / chi
  RegimeCheck stability;      // ratio = 2 g sin(phi) / gamma, pass iff < 1
  RegimeCheck damping_positive;  // ratio = g sin(phi) / gamma, pass iff < 1 (Gamma > 0)
  RegimeCheck lamb_dicke;     // ratio = k_x0 |alpha|
  RegimeCheck semiclassical;  // ratio = |beta|
  bool bath_physical = true;
};

RegimeReport check_regime(const ModelParams& p, const std::optional<PhysicalInputs>& phys = std::nullopt,
                          const RegimeThresholds& thresholds = {});

}  // namespace squash
