#include "squash/params.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "squash/analytic.hpp"
#include "squash/errors.hpp"

namespace squash {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

std::pair<double, double> sin_cos_phase(double phi) {
  const double quarter = std::numbers::pi / 2;
  const double k = std::round(phi / quarter);
  if (std::abs(phi - k * quarter) <= 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(phi))) {
    switch (((static_cast<long long>(k) % 4) + 4) % 4) {
      case 0: return {0.0, 1.0};
      case 1: return {1.0, 0.0};
      case 2: return {0.0, -1.0};
      default: return {-1.0, 0.0};
    }
  }
  return {std::sin(phi), std::cos(phi)};
}

double ModelParams::sin_phi() const { return sin_cos_phase(phi).first; }
double ModelParams::cos_phi() const { return sin_cos_phase(phi).second; }

void ModelParams::validate() const {
  require(std::isfinite(gamma) && gamma > 0, "gamma must be > 0");
  require(std::isfinite(kappa) && kappa > 0, "kappa must be > 0");
  require(std::isfinite(chi) && chi >= 0, "chi must be >= 0");
  require(std::isfinite(g), "g must be finite");
  require(std::isfinite(phi), "phi must be finite");
  require(std::isfinite(eta) && eta > 0 && eta <= 1, "eta must lie in (0, 1]");
  require(std::isfinite(nbar) && nbar >= 0, "nbar must be >= 0");
}

Couplings derive_couplings(const PhysicalInputs& p) {
  if (!(p.delta > 0)) throw DomainError("atomic detuning delta must be > 0");
  if (!(p.alpha_mag > 0) || !(p.beta_mag > 0)) throw DomainError("|alpha| and |beta| must be > 0");
  Couplings c;
  const double ek = p.epsilon * p.k_x0;
  c.G = 2.0 * ek * ek / p.delta;
  c.chi = 4.0 * c.G * p.alpha_mag * p.beta_mag;
  c.chi_negative = true;
  return c;
}

EffectiveBath effective_bath(const ModelParams& p) {
  p.validate();
  const double s = p.feedback_drift();
  EffectiveBath bath;
  bath.Gamma = p.gamma - s;
  if (bath.Gamma == 0.0) {
    throw SingularParameters("Gamma = gamma - g sin(phi) vanishes; N and M are undefined");
  }
  double feedback_noise = 0.0;  // g^2 / (4 eta chi^2 / kappa)
  if (p.g != 0.0) {
    if (p.chi == 0.0) throw DomainError("chi = 0 with g != 0: feedback noise g^2 kappa / (4 eta chi^2) diverges");
    feedback_noise = p.g * p.g * p.kappa / (4.0 * p.eta * p.chi * p.chi);
  }
  const double backaction = p.chi * p.chi / (4.0 * p.kappa);
  bath.N = (p.gamma * p.nbar + backaction + feedback_noise + 0.5 * s) / bath.Gamma;
  bath.M = -std::complex<double>(backaction - feedback_noise, -0.5 * p.g * p.cos_phi()) / bath.Gamma;
  return bath;
}

bool EffectiveBath::is_physical(double rel_tol) const {
  return std::norm(M) <= N * (N + 1.0) * (1.0 + rel_tol);
}

void require_physical(const EffectiveBath& bath) {
  if (!bath.is_physical()) {
    std::ostringstream os;
    os.precision(17);
    os << "non-physical effective bath: |M|^2 = " << std::norm(bath.M) << " exceeds N(N+1) = " << bath.N * (bath.N + 1);
    throw NonPhysicalBath(os.str());
  }
}

std::string to_string(CheckState s) {
  switch (s) {
    case CheckState::pass: return "pass";
    case CheckState::fail: return "fail";
    case CheckState::not_evaluated: return "not evaluated";
  }
  return "?";
}

RegimeReport check_regime(const ModelParams& p, const std::optional<PhysicalInputs>& phys,
                          const RegimeThresholds& thresholds) {
  auto verdict = [](bool ok) { return ok ? CheckState::pass : CheckState::fail; };
  RegimeReport r;
  const double s = p.feedback_drift();

  r.stability.ratio = 2.0 * s / p.gamma;
  r.stability.state = verdict(is_stable(p));
  r.damping_positive.ratio = s / p.gamma;
  r.damping_positive.state = verdict(s < p.gamma);

  if (p.chi > 0) {
    r.adiabatic.ratio = p.kappa / p.chi;
    r.adiabatic.state = verdict(r.adiabatic.ratio >= thresholds.adiabatic_ratio);
  } else {
    r.adiabatic.ratio = std::numeric_limits<double>::infinity();
    r.adiabatic.state = CheckState::pass;
  }

  if (phys) {
    r.lamb_dicke.ratio = phys->k_x0 * phys->alpha_mag;
    r.lamb_dicke.state =
        verdict(r.lamb_dicke.ratio <= thresholds.lamb_dicke_max && phys->alpha_mag >= thresholds.large_amplitude);
    r.semiclassical.ratio = phys->beta_mag;
    r.semiclassical.state = verdict(phys->beta_mag >= thresholds.large_amplitude);
  }

  try {
    r.bath_physical = effective_bath(p).is_physical();
  } catch (const std::exception&) {
    r.bath_physical = false;
  }
  return r;
}

}  // namespace squash
