#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "squash/analytic.hpp"
#include "squash/hilbert.hpp"
#include "squash/params.hpp"

namespace squash {

using SparseSuperop = Eigen::SparseMatrix<cplx>;

/// Thermal Lindbladian: (gamma/2)(n+1)(2 a r a^dag - ...) + (gamma/2) n (2 a^dag r a - ...).
CMatrix rhs_thermal(const CMatrix& rho, double gamma, double nbar);

/// QND back-action term -(rate/2) [X, [X, rho]], rate = chi^2 / kappa.
CMatrix rhs_measurement(const CMatrix& rho, double rate);

/// Markovian feedback equation before rearrangement, with K rho = (g/2)[a - a^dag, rho]:
///   L_th rho - (chi^2 / 2 kappa)[X,[X,rho]] + K(i e^{i phi} rho X - i e^{-i phi} X rho)
///   + K^2 rho / (2 eta chi^2 / kappa).
/// Assembled from dense operator products.
CMatrix rhs_generic_feedback(const CMatrix& rho, const ModelParams& p);

/// Squeezed-bath form with (Gamma, N, M) plus the parametric term -(g/4) sin(phi) [a^2 - a^dag^2, rho].
/// Assembled from banded ladder products. Throws NonPhysicalBath for |M|^2 > N(N+1).
CMatrix rhs_final_feedback(const CMatrix& rho, const ModelParams& p);

enum class RhsKind { thermal, generic_feedback, final_feedback };

struct RhsSpec {
  RhsKind kind = RhsKind::final_feedback;
  ModelParams params;
};

/// A validated right-hand side with cached coefficients.
class Generator {
 public:
  explicit Generator(RhsSpec spec);

  const RhsSpec& spec() const { return spec_; }
  CMatrix apply(const CMatrix& rho) const;

  /// max(Gamma (N+1), chi^2/kappa, gamma (nbar+1), |g|) for the terms present.
  double fastest_rate() const;

  /// Column-major vectorized generator: vec(L rho) = S vec(rho).
  SparseSuperop superoperator(int dim) const;

 private:
  RhsSpec spec_;
  EffectiveBath bath_{};
};

struct EvolveOptions {
  double t_final = 0.0;
  double dt = 0.1;
  int n_checkpoints = 10;  // states kept at evenly spaced times (plus t = 0)
  double tail_warn = 1e-6;
  double tail_error = 1e-4;
  bool check_positivity = true;
};

struct EvolveResult {
  std::vector<double> times;
  std::vector<CMatrix> states;
  double max_trace_drift = 0.0;        // per step
  double max_hermitian_deviation = 0.0;  // over all steps
  double min_eigenvalue = 1.0;         // over checkpoints
  double max_tail_mass = 0.0;          // over checkpoints
  long steps = 0;
};

using StepObserver = std::function<void(long step, double t, const CMatrix& rho)>;

/// Fixed-step RK4 integration.
///
/// Requires dt <= 0.1 / fastest_rate() and dt below the RK4 stability limit of the truncated
/// generator; throws StepSizeError otherwise and TruncationError when the tail mass exceeds
/// `tail_error`.
EvolveResult evolve(const DensityMatrix& rho0, const Generator& gen, const EvolveOptions& opts,
                    const StepObserver& observer = {});

/// Estimate of the spectral radius of the generator on a dim-dimensional space.
double spectral_radius_estimate(const Generator& gen, int dim);

enum class SteadyMethod { null_space, integrate };

struct SteadyOptions {
  int dim = 30;
  double tol = 1e-9;             // max |L rho| for acceptance
  SteadyMethod method = SteadyMethod::null_space;
  double dt = 0.0;               // integration step; 0 picks a stable default
  double max_time = 0.0;         // integration budget; 0 picks 400 / slowest rate
  bool auto_grow = true;         // double dim (up to max_dim) while the tail is too heavy
  int max_dim = 120;
  double tail_warn = 1e-6;
  double tail_error = 1e-4;
};

struct SteadyResult {
  CMatrix rho;
  int dim = 0;
  double residual = 0.0;  // max |L rho|
  double tail = 0.0;
};

SteadyResult steady_state(const RhsSpec& spec, const SteadyOptions& opts = {});

/// Linear moment dynamics d/dt (n, Re m, Im m) = A v + b with n = <a^dag a>, m = <a^2>, derived from
/// the unrearranged feedback equation.
struct MomentDynamics {
  Eigen::Matrix3d A;
  Eigen::Vector3d b;
};

MomentDynamics moment_dynamics(const ModelParams& p);

/// d/dt (Re<a>, Im<a>) = F (Re<a>, Im<a>).
Eigen::Matrix2d first_moment_drift(const ModelParams& p);

/// Stationary (zeta, mu) from the moment equations; throws SingularParameters at the stability edge.
StationaryGaussian moment_oracle(const ModelParams& p);

}  // namespace squash
