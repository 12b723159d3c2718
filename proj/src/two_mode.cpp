#include "squash/two_mode.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "squash/errors.hpp"

namespace squash {

using cplx = std::complex<double>;

namespace {

constexpr cplx I{0.0, 1.0};

struct Residuals {
  cplx r1, r2;
};

Residuals residuals(const TwoModePhysical& tp, cplx alpha, cplx beta) {
  const double a2 = std::norm(alpha);
  const double b2 = std::norm(beta);
  return {-I * (tp.delta_b - tp.G / 2 - tp.G * a2) * beta - 0.5 * tp.kappa * beta + tp.drive_b,
          -I * (tp.delta_a - tp.G * b2) * alpha - 0.5 * tp.gamma * alpha + tp.drive_a};
}

double max_abs(const Residuals& r) { return std::max(std::abs(r.r1), std::abs(r.r2)); }

// Fills the drift rows of mode c (rows r, r+1) for dc/dt = u w + v w^dag, w the other mode (columns k, k+1).
void couple(Eigen::Matrix4d& F, int r, int k, cplx u, cplx v) {
  F(r, k) += (u + v).real();
  F(r, k + 1) += (I * (u - v)).real();
  F(r + 1, k) += (u + v).imag();
  F(r + 1, k + 1) += (I * (u - v)).imag();
}

TwoModeGaussian base(double gamma, double kappa, double nbar) {
  TwoModeGaussian m;
  m.F.setZero();
  m.F.diagonal() << -gamma / 2, -gamma / 2, -kappa / 2, -kappa / 2;
  m.D.setZero();
  const double dth = gamma * (2 * nbar + 1) / 4;
  m.D.diagonal() << dth, dth, kappa / 4, kappa / 4;
  m.V.setZero();
  return m;
}

}  // namespace

void TwoModePhysical::validate() const {
  if (!(gamma > 0) || !(kappa > 0)) throw DomainError("two-mode: gamma and kappa must be > 0");
  if (!(G >= 0)) throw DomainError("two-mode: G must be >= 0");
  if (!(nbar >= 0)) throw DomainError("two-mode: nbar must be >= 0");
  if (!std::isfinite(delta_a) || !std::isfinite(delta_b)) throw DomainError("two-mode: detunings must be finite");
}

double semiclassical_residual(const TwoModePhysical& tp, cplx alpha, cplx beta) {
  return max_abs(residuals(tp, alpha, beta));
}

FixedPoint semiclassical_fixed_point(const TwoModePhysical& tp, std::optional<std::pair<cplx, cplx>> guess) {
  tp.validate();
  FixedPoint fp;
  if (guess) {
    fp.alpha = guess->first;
    fp.beta = guess->second;
  } else {
    fp.alpha = tp.drive_a / (I * tp.delta_a + tp.gamma / 2);
    fp.beta = tp.drive_b / (I * (tp.delta_b - tp.G / 2) + tp.kappa / 2);
  }
  const double tol = 1e-12 * std::max({1.0, std::abs(tp.drive_a), std::abs(tp.drive_b)});

  Residuals r = residuals(tp, fp.alpha, fp.beta);
  double res = max_abs(r);
  int it = 0;
  for (; it < 100 && res > tol; ++it) {
    // Real Jacobian in (Re alpha, Im alpha, Re beta, Im beta).
    const cplx c1 = -I * (tp.delta_b - tp.G / 2 - tp.G * std::norm(fp.alpha)) - tp.kappa / 2;
    const cplx c2 = -I * (tp.delta_a - tp.G * std::norm(fp.beta)) - tp.gamma / 2;
    const cplx cols1[4] = {2.0 * I * tp.G * fp.beta * fp.alpha.real(), 2.0 * I * tp.G * fp.beta * fp.alpha.imag(), c1,
                           I * c1};
    const cplx cols2[4] = {c2, I * c2, 2.0 * I * tp.G * fp.alpha * fp.beta.real(),
                           2.0 * I * tp.G * fp.alpha * fp.beta.imag()};
    Eigen::Matrix4d J;
    for (int k = 0; k < 4; ++k) {
      J(0, k) = cols1[k].real();
      J(1, k) = cols1[k].imag();
      J(2, k) = cols2[k].real();
      J(3, k) = cols2[k].imag();
    }
    const Eigen::Vector4d rv(r.r1.real(), r.r1.imag(), r.r2.real(), r.r2.imag());
    const Eigen::Vector4d step = J.fullPivLu().solve(-rv);
    if (!step.allFinite()) break;
    // Backtracking keeps the iteration from jumping between branches of the Kerr response.
    double lambda = 1.0;
    for (int bt = 0; bt < 30; ++bt) {
      const cplx a = fp.alpha + lambda * cplx(step[0], step[1]);
      const cplx b = fp.beta + lambda * cplx(step[2], step[3]);
      const Residuals rn = residuals(tp, a, b);
      if (max_abs(rn) < res || bt == 29) {
        fp.alpha = a;
        fp.beta = b;
        r = rn;
        res = max_abs(rn);
        break;
      }
      lambda *= 0.5;
    }
  }
  fp.iterations = it;
  fp.residual = res;
  if (!(res <= tol)) {
    std::ostringstream os;
    os << "semiclassical_fixed_point: Newton did not converge in 100 iterations (residual " << res << ")";
    throw ConvergenceError(os.str());
  }
  if (tp.G > 0) {
    const double ta = tp.delta_b / tp.G - 0.5;
    const double tb = tp.delta_a / tp.G;
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y)); };
    fp.tuned = close(std::norm(fp.alpha), ta) && close(std::norm(fp.beta), tb);
  } else {
    fp.tuned = tp.delta_a == 0.0 && tp.delta_b == 0.0;
  }
  return fp;
}

TwoModeGaussian assemble_drift_diffusion(const TwoModePhysical& tp, cplx alpha, cplx beta) {
  tp.validate();
  TwoModeGaussian m = base(tp.gamma, tp.kappa, tp.nbar);
  // Linearized fluctuations: da/dt = iG alpha (beta^* b + beta b^dag), db/dt = iG beta (alpha^* a + alpha a^dag).
  couple(m.F, 0, 2, I * tp.G * alpha * std::conj(beta), I * tp.G * alpha * beta);
  couple(m.F, 2, 0, I * tp.G * beta * std::conj(alpha), I * tp.G * beta * alpha);
  return m;
}

TwoModeGaussian assemble_from_rates(double gamma, double kappa, double chi_signed, double nbar) {
  if (!(gamma > 0) || !(kappa > 0)) throw DomainError("two-mode: gamma and kappa must be > 0");
  if (!(nbar >= 0)) throw DomainError("two-mode: nbar must be >= 0");
  TwoModeGaussian m = base(gamma, kappa, nbar);
  // H = chi Y X with real amplitudes: only P_a and P_b are driven.
  m.F(1, 2) = -chi_signed / 2;
  m.F(3, 0) = -chi_signed / 2;
  return m;
}

double lyapunov_residual(const Eigen::Matrix4d& F, const Eigen::Matrix4d& D, const Eigen::Matrix4d& V) {
  return (F * V + V * F.transpose() + D).cwiseAbs().maxCoeff();
}

Eigen::Matrix4d stationary_covariance(const Eigen::Matrix4d& F, const Eigen::Matrix4d& D) {
  const Eigen::Vector4cd ev = F.eigenvalues();
  for (int k = 0; k < 4; ++k) {
    if (!(ev[k].real() < 0)) {
      std::ostringstream os;
      os << "stationary_covariance: drift matrix is not Hurwitz (eigenvalue " << ev[k] << ")";
      throw UnstableParameters(os.str());
    }
  }
  // Column-major vec: vec(F V + V F^T) = (I kron F + F kron I) vec V.
  Eigen::Matrix<double, 16, 16> L = Eigen::Matrix<double, 16, 16>::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        L(4 * j + i, 4 * j + k) += F(i, k);
        L(4 * j + i, 4 * k + i) += F(j, k);
      }
  const Eigen::Matrix<double, 16, 1> rhs = -Eigen::Map<const Eigen::Matrix<double, 16, 1>>(D.data());
  const Eigen::Matrix<double, 16, 1> v = L.fullPivLu().solve(rhs);
  Eigen::Matrix4d V = Eigen::Map<const Eigen::Matrix4d>(v.data());
  V = 0.5 * (V + V.transpose()).eval();
  const double res = lyapunov_residual(F, D, V);
  if (!(res <= 1e-10 * std::max(1.0, D.cwiseAbs().maxCoeff()))) {
    std::ostringstream os;
    os << "stationary_covariance: Lyapunov residual " << res << " exceeds tolerance";
    throw ConvergenceError(os.str());
  }
  return V;
}

AdiabaticReport adiabatic_check(const ModelParams& p) {
  p.validate();
  TwoModeGaussian m = assemble_from_rates(p.gamma, p.kappa, -p.chi, p.nbar);
  m.V = stationary_covariance(m.F, m.D);
  AdiabaticReport r;
  r.var_x_two_mode = m.V(0, 0);
  r.var_p_two_mode = m.V(1, 1);
  r.var_x_reduced = 0.5 * (0.5 + p.nbar);
  r.var_p_reduced = 0.5 * (0.5 + p.nbar + p.chi * p.chi / (2 * p.kappa * p.gamma));
  r.rel_dev_x = std::abs(r.var_x_two_mode - r.var_x_reduced) / r.var_x_reduced;
  r.rel_dev_p = std::abs(r.var_p_two_mode - r.var_p_reduced) / r.var_p_reduced;
  r.bound_x = p.gamma / p.kappa;
  r.bound_p = p.chi * p.chi / (p.kappa * p.kappa) + p.gamma / p.kappa;
  r.regime_ok = p.chi == 0.0 || p.kappa / p.chi >= 10.0;
  r.within_bounds = r.rel_dev_x <= r.bound_x && r.rel_dev_p <= r.bound_p;
  return r;
}

}  // namespace squash
