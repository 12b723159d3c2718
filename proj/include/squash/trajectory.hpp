#pragma once

#include <cstdint>
#include <vector>

#include "squash/hilbert.hpp"
#include "squash/params.hpp"

namespace squash {

/// Ito-Euler step of the homodyne-conditioned master equation (no feedback):
///   d rho = [L_th rho - (chi^2 / 2 kappa)[X,[X,rho]]] dt
///         + sqrt(eta chi^2 / kappa) dW (i e^{i phi} rho X - i e^{-i phi} X rho + 2 sin(phi) <X> rho).
/// The result is renormalized to unit trace; `renormalization` receives |Tr - 1| before renormalizing.
/// Throws StepSizeError if that exceeds 1e-3.
CMatrix sme_step(const CMatrix& rho, const ModelParams& p, double dW, double dt, double* renormalization = nullptr);

/// Only the stochastic increment (the dW term), without renormalization.
CMatrix sme_noise_term(const CMatrix& rho, const ModelParams& p, double dW);

/// Scaled homodyne current J = I / (eta chi) = -2 sin(phi) <X>_c + sqrt(kappa / (eta chi^2)) xi.
///
/// The sign of the signal term is the one implied by the innovation of `sme_step`: with this J the
/// average of measurement followed by `feedback_apply` reproduces the Markovian feedback equation.
double photocurrent(const CMatrix& rho, const ModelParams& p, double xi);

/// Hermitian rho -> exp(K J dt) rho with K rho = (g/2)[a - a^dag, rho], summed as a power series in J dt.
CMatrix feedback_apply(const CMatrix& rho, double J, const ModelParams& p, double dt);

struct TrajectoryOptions {
  double t_final = 100.0;
  double dt = 0.05;
  int n_records = 20;        // moments stored at evenly spaced times (plus t = 0)
  bool keep_current = false;  // store the per-step current
  double tail_error = 1e-4;
};

struct ConditionedMoments {
  double x = 0.0;    // <X>_c
  double x2 = 0.0;   // <X^2>_c
  double n = 0.0;    // <a^dag a>_c
  cplx aa{0.0, 0.0};  // <a^2>_c

  double var_x() const { return x2 - x * x; }
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<ConditionedMoments> cond_moments;
  std::vector<double> current_binned;  // mean J over each record interval; NaN at t = 0
  std::vector<double> current;         // per step, only with keep_current
  double max_renormalization = 0.0;
  double max_purity = 0.0;
  double max_tail_mass = 0.0;
};

/// Conditioned trajectory with Markovian feedback. The noise of step k is
/// rng::standard_normal(seed, k), so the record is a pure function of (seed, p, rho0, options).
Trajectory run_trajectory(const ModelParams& p, const DensityMatrix& rho0, const TrajectoryOptions& opts,
                          std::uint64_t seed);

struct MomentStats {
  std::vector<double> mean;
  std::vector<double> standard_error;  // NaN when n_traj < 2
};

struct EnsembleStats {
  int n_traj = 0;
  std::vector<double> times;
  MomentStats x, x2, n, re_aa, im_aa;
  double max_tail_mass = 0.0;
};

/// Runs `n_traj` trajectories with seeds rng::derive_seed(base_seed, i) on `workers` threads
/// (0 = hardware concurrency). Reduction is in trajectory order, so results do not depend on workers.
/// `keep` (optional) receives every trajectory in index order.
EnsembleStats ensemble(const ModelParams& p, const DensityMatrix& rho0, int n_traj, const TrajectoryOptions& opts,
                       std::uint64_t base_seed, int workers = 0, std::vector<Trajectory>* keep = nullptr);

EnsembleStats reduce(const std::vector<Trajectory>& trajectories);

}  // namespace squash
