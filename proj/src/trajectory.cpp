#include "squash/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "squash/errors.hpp"
#include "squash/master_equation.hpp"
#include "squash/rng.hpp"

namespace squash {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<double>& sqrt_table(Eigen::Index d) {
  thread_local std::vector<double> sq;
  if (static_cast<Eigen::Index>(sq.size()) < d + 2) {
    sq.resize(d + 2);
    for (Eigen::Index i = 0; i < d + 2; ++i) sq[i] = std::sqrt(static_cast<double>(i));
  }
  return sq;
}

// Copies the strict lower triangle's conjugate into the upper triangle.
void mirror_lower(CMatrix& m) {
  const Eigen::Index d = m.rows();
  for (Eigen::Index j = 1; j < d; ++j)
    for (Eigen::Index i = 0; i < j; ++i) m(i, j) = std::conj(m(j, i));
}

// One fused pass: out = rho + dt (L_th + L_meas) rho + k dW (i c rho X - i c* X rho + 2 sin(phi) <X> rho).
// Valid for Hermitian rho.
void sme_euler_fused(const CMatrix& r, const ModelParams& p, double dW, double dt, CMatrix& out) {
  const Eigen::Index d = r.rows();
  out.resize(d, d);
  const auto& sq = sqrt_table(d);
  const auto [s, c] = sin_cos_phase(p.phi);
  const double down = p.gamma * (p.nbar + 1.0) * dt;
  const double up = p.gamma * p.nbar * dt;
  const double meas = p.measurement_rate() * dt;
  const double k = p.chi == 0.0 ? 0.0 : std::sqrt(p.eta * p.chi * p.chi / p.kappa) * dW;
  const cplx ic = cplx(0.0, 1.0) * cplx(c, s);  // i e^{i phi}
  const double mean_x = ladder::expect_x(r).real();
  const cplx diag_noise = k * 2.0 * s * mean_x;
  auto at = [&](Eigen::Index i, Eigen::Index j) -> cplx {
    return (i >= 0 && j >= 0 && i < d && j < d) ? r(i, j) : cplx(0.0);
  };
  auto num = [&](Eigen::Index i) { return static_cast<double>(i); };
  auto anti = [&](Eigen::Index i) { return i + 1 < d ? static_cast<double>(i + 1) : 0.0; };
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j; i < d; ++i) {
      const cplx rij = r(i, j);
      // a rho a^dag, a^dag rho a, a rho a, a^dag rho a^dag
      const cplx ara = sq[i + 1] * sq[j + 1] * at(i + 1, j + 1);
      const cplx adra = (i > 0 && j > 0) ? sq[i] * sq[j] * r(i - 1, j - 1) : cplx(0.0);
      const cplx araa = (j > 0) ? sq[i + 1] * sq[j] * at(i + 1, j - 1) : cplx(0.0);
      const cplx adrad = (i > 0) ? sq[i] * sq[j + 1] * at(i - 1, j + 1) : cplx(0.0);
      // X^2 rho and rho X^2 (X^2 = (a^2 + a^dag^2 + a a^dag + a^dag a) / 4)
      const cplx x2r = 0.25 * (sq[i + 1] * sq[i + 2] * at(i + 2, j) + (i > 1 ? sq[i] * sq[i - 1] * r(i - 2, j) : cplx(0.0)) +
                               (anti(i) + num(i)) * rij);
      const cplx rx2 = 0.25 * ((j > 1 ? sq[j] * sq[j - 1] * r(i, j - 2) : cplx(0.0)) + sq[j + 1] * sq[j + 2] * at(i, j + 2) +
                               (anti(j) + num(j)) * rij);
      const cplx xrx = 0.25 * (ara + adra + araa + adrad);
      cplx v = rij;
      v += down * (ara - 0.5 * (num(i) + num(j)) * rij);
      if (up != 0.0) v += up * (adra - 0.5 * (anti(i) + anti(j)) * rij);
      v += meas * (xrx - 0.5 * (x2r + rx2));
      if (k != 0.0) {
        const cplx rx = 0.5 * ((j > 0 ? sq[j] * r(i, j - 1) : cplx(0.0)) + sq[j + 1] * at(i, j + 1));
        const cplx xr = 0.5 * (sq[i + 1] * at(i + 1, j) + (i > 0 ? sq[i] * r(i - 1, j) : cplx(0.0)));
        v += k * (ic * rx + std::conj(ic) * xr) + diag_noise * rij;
      }
      out(i, j) = v;
    }
  }
  mirror_lower(out);
}

double measurement_amplitude(const ModelParams& p) { return std::sqrt(p.eta * p.chi * p.chi / p.kappa); }

void check_feedback_domain(const ModelParams& p) {
  if (p.g != 0.0 && p.chi == 0.0) {
    throw DomainError("feedback with chi = 0: the photocurrent carries no signal and infinite noise");
  }
}

}  // namespace

CMatrix sme_noise_term(const CMatrix& rho, const ModelParams& p, double dW) {
  const auto [s, c] = sin_cos_phase(p.phi);
  const cplx e_plus(c, s);
  const cplx I(0.0, 1.0);
  const double mean_x = ladder::expect_x(rho).real();
  const double k = measurement_amplitude(p);
  CMatrix h = (I * e_plus) * ladder::x_right(rho) - (I * std::conj(e_plus)) * ladder::x_left(rho);
  h += (2.0 * s * mean_x) * rho;
  return (k * dW) * h;
}

CMatrix sme_step(const CMatrix& rho, const ModelParams& p, double dW, double dt, double* renormalization) {
  if (rho.rows() != rho.cols() || rho.rows() < 2) throw DomainError("sme_step: rho must be square with dim >= 2");
  CMatrix out;
  sme_euler_fused(rho, p, dW, dt, out);
  const cplx tr = out.trace();
  const double renorm = std::abs(tr - 1.0);
  if (renormalization) *renormalization = renorm;
  if (renorm > 1e-3) {
    std::ostringstream os;
    os << "sme_step: trace renormalization " << renorm << " exceeds 1e-3; reduce dt";
    throw StepSizeError(os.str());
  }
  out /= tr.real();
  return out;
}

double photocurrent(const CMatrix& rho, const ModelParams& p, double xi) {
  if (p.chi == 0.0) return kNaN;
  const double mean_x = ladder::expect_x(rho).real();
  return -2.0 * p.sin_phi() * mean_x + std::sqrt(p.kappa / (p.eta * p.chi * p.chi)) * xi;
}

CMatrix feedback_apply(const CMatrix& rho, double J, const ModelParams& p, double dt) {
  const double theta = 0.5 * p.g * J * dt;
  if (theta == 0.0) return rho;
  if (!std::isfinite(theta)) throw DomainError("feedback_apply: non-finite feedback signal");
  const Eigen::Index d = rho.rows();
  const auto& sq = sqrt_table(d);  // sq[i] = sqrt(i)
  // Terms live in zero-bordered (d+2)x(d+2) buffers so the stencil needs no edge tests.
  const Eigen::Index w = d + 2;
  CMatrix term = CMatrix::Zero(w, w);
  CMatrix next = CMatrix::Zero(w, w);
  term.block(1, 1, d, d) = rho;
  CMatrix out = rho;
  const double scale2 = rho.cwiseAbs2().maxCoeff();
  for (int k = 1; k <= 200; ++k) {
    // next = (theta / k) [a - a^dag, term] on the lower triangle; every term stays Hermitian.
    const double c = theta / k;
    double biggest = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const cplx* tl = term.col(j).data() + 1;
      const cplx* tj = term.col(j + 1).data() + 1;
      const cplx* tr = term.col(j + 2).data() + 1;
      cplx* nj = next.col(j + 1).data() + 1;
      cplx* oj = out.col(j).data();
      const double sl = c * sq[j];
      const double sr = c * sq[j + 1];
      for (Eigen::Index i = j; i < d; ++i) {
        const cplx v = c * (sq[i + 1] * tj[i + 1] - sq[i] * tj[i - 1]) - sl * tl[i] + sr * tr[i];
        nj[i] = v;
        oj[i] += v;
        biggest = std::max(biggest, std::norm(v));
      }
    }
    // the next pass reads only the superdiagonal of the upper triangle
    for (Eigen::Index j = 1; j < d; ++j) next(j, j + 1) = std::conj(next(j + 1, j));
    term.swap(next);
    if (biggest <= 1e-32 * scale2) {
      mirror_lower(out);
      return out;
    }
  }
  throw ConvergenceError("feedback_apply: power series did not converge; feedback step J dt too large");
}

Trajectory run_trajectory(const ModelParams& p, const DensityMatrix& rho0, const TrajectoryOptions& opts,
                          std::uint64_t seed) {
  p.validate();
  check_feedback_domain(p);
  if (!(opts.dt > 0) || !(opts.t_final >= 0)) throw StepSizeError("trajectory: dt must be > 0, t_final >= 0");

  const bool measured = p.chi != 0.0;
  RhsSpec det_spec{measured || p.g != 0.0 ? RhsKind::final_feedback : RhsKind::thermal, p};
  const double rate = Generator(det_spec).fastest_rate();
  if (opts.dt > 0.01 / rate) {
    std::ostringstream os;
    os << "trajectory: dt = " << opts.dt << " exceeds 0.01 / fastest rate = " << 0.01 / rate;
    throw StepSizeError(os.str());
  }

  const long n_steps = std::lround(opts.t_final / opts.dt);
  if (std::abs(n_steps * opts.dt - opts.t_final) > 1e-9 * std::max(1.0, opts.t_final)) {
    throw StepSizeError("trajectory: t_final must be an integer multiple of dt");
  }
  const int n_rec = std::max(1, opts.n_records);
  const int d = rho0.dim();
  const int margin = default_tail_margin(d);

  Trajectory tr;
  tr.seed = seed;
  tr.times.reserve(n_rec + 1);
  tr.cond_moments.reserve(n_rec + 1);
  if (opts.keep_current) tr.current.reserve(n_steps);

  CMatrix rho = rho0.data();
  double current_sum = 0.0;
  long current_count = 0;
  auto record = [&](long step, double t) {
    const Moments m = moments(rho);
    ConditionedMoments cm;
    cm.x = m.mean_x(0.0);
    cm.n = m.mean_n;
    cm.aa = m.mean_aa;
    cm.x2 = 0.25 * (1.0 + 2.0 * m.mean_n + 2.0 * m.mean_aa.real());
    tr.times.push_back(t);
    tr.cond_moments.push_back(cm);
    tr.current_binned.push_back(current_count > 0 ? current_sum / current_count : kNaN);
    current_sum = 0.0;
    current_count = 0;
    const double tail = tail_mass(rho, margin);
    tr.max_tail_mass = std::max(tr.max_tail_mass, tail);
    if (tail > opts.tail_error) {
      std::ostringstream os;
      os << "trajectory: truncation overflow at step " << step << " (tail mass " << tail << ", dim " << d << ")";
      throw TruncationError(os.str());
    }
  };
  record(0, 0.0);
  tr.max_purity = purity(rho);

  const double sqrt_dt = std::sqrt(opts.dt);
  long next_rec = 1;
  auto rec_step = [&](long k) { return (k * n_steps) / n_rec; };
  for (long step = 1; step <= n_steps; ++step) {
    const double dW = sqrt_dt * rng::standard_normal(seed, static_cast<std::uint64_t>(step));
    const double J = photocurrent(rho, p, dW / opts.dt);
    double renorm = 0.0;
    try {
      rho = sme_step(rho, p, dW, opts.dt, &renorm);
    } catch (const StepSizeError& e) {
      std::ostringstream os;
      os << e.what() << " (step " << step << ")";
      throw StepSizeError(os.str());
    }
    tr.max_renormalization = std::max(tr.max_renormalization, renorm);
    if (p.g != 0.0) rho = feedback_apply(rho, J, p, opts.dt);
    tr.max_purity = std::max(tr.max_purity, rho.squaredNorm());
    if (opts.keep_current) tr.current.push_back(J);
    current_sum += J;
    ++current_count;
    while (next_rec <= n_rec && rec_step(next_rec) == step) {
      record(step, step * opts.dt);
      ++next_rec;
    }
  }
  return tr;
}

namespace {

void accumulate(MomentStats& stats, const std::vector<Trajectory>& trs, std::size_t n_times,
                double (*get)(const ConditionedMoments&)) {
  const std::size_t n = trs.size();
  stats.mean.assign(n_times, 0.0);
  stats.standard_error.assign(n_times, kNaN);
  for (std::size_t k = 0; k < n_times; ++k) {
    double sum = 0.0;
    for (const auto& t : trs) sum += get(t.cond_moments[k]);
    const double mean = sum / static_cast<double>(n);
    stats.mean[k] = mean;
    if (n >= 2) {
      double ss = 0.0;
      for (const auto& t : trs) {
        const double dev = get(t.cond_moments[k]) - mean;
        ss += dev * dev;
      }
      stats.standard_error[k] = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }
  }
}

}  // namespace

EnsembleStats reduce(const std::vector<Trajectory>& trajectories) {
  EnsembleStats st;
  st.n_traj = static_cast<int>(trajectories.size());
  if (trajectories.empty()) return st;
  st.times = trajectories.front().times;
  const std::size_t n_times = st.times.size();
  for (const auto& t : trajectories) {
    if (t.times.size() != n_times) throw DomainError("reduce: trajectories have different record grids");
    st.max_tail_mass = std::max(st.max_tail_mass, t.max_tail_mass);
  }
  accumulate(st.x, trajectories, n_times, [](const ConditionedMoments& m) { return m.x; });
  accumulate(st.x2, trajectories, n_times, [](const ConditionedMoments& m) { return m.x2; });
  accumulate(st.n, trajectories, n_times, [](const ConditionedMoments& m) { return m.n; });
  accumulate(st.re_aa, trajectories, n_times, [](const ConditionedMoments& m) { return m.aa.real(); });
  accumulate(st.im_aa, trajectories, n_times, [](const ConditionedMoments& m) { return m.aa.imag(); });
  return st;
}

EnsembleStats ensemble(const ModelParams& p, const DensityMatrix& rho0, int n_traj, const TrajectoryOptions& opts,
                       std::uint64_t base_seed, int workers, std::vector<Trajectory>* keep) {
  if (n_traj < 1) throw DomainError("ensemble: n_traj must be >= 1");
  std::vector<Trajectory> results(static_cast<std::size_t>(n_traj));
  int n_workers = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_workers = std::min(n_workers, n_traj);

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (!failed.load()) {
      const int i = next.fetch_add(1);
      if (i >= n_traj) return;
      try {
        results[static_cast<std::size_t>(i)] =
            run_trajectory(p, rho0, opts, rng::derive_seed(base_seed, static_cast<std::uint64_t>(i)));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  EnsembleStats st = reduce(results);
  if (keep) *keep = std::move(results);
  return st;
}

}  // namespace squash
