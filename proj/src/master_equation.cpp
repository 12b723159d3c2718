#include "squash/master_equation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include "squash/errors.hpp"
#include "squash/log.hpp"

namespace squash {

namespace {

// Diagonals of the truncated a^dag a and a a^dag.
Eigen::VectorXd number_diag(Eigen::Index d) { return Eigen::VectorXd::LinSpaced(d, 0.0, static_cast<double>(d - 1)); }

Eigen::VectorXd anti_number_diag(Eigen::Index d) {
  Eigen::VectorXd v = number_diag(d).array() + 1.0;
  v(d - 1) = 0.0;
  return v;
}

CMatrix scale_rows(const Eigen::VectorXd& w, const CMatrix& r) { return w.asDiagonal() * r; }
CMatrix scale_cols(const CMatrix& r, const Eigen::VectorXd& w) { return r * w.asDiagonal(); }

void require_square(const CMatrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() < 2) throw DomainError("rhs: rho must be square with dim >= 2");
}

double feedback_noise_rate(const ModelParams& p) {
  if (p.g == 0.0) return 0.0;
  if (p.chi == 0.0) throw DomainError("chi = 0 with g != 0: the K^2 term divides by eta chi^2 / kappa");
  return p.g * p.g * p.kappa / (4.0 * p.eta * p.chi * p.chi);
}

CMatrix thermal_ladder(const CMatrix& rho, double gamma, double nbar) {
  const Eigen::Index d = rho.rows();
  const Eigen::VectorXd n = number_diag(d);
  const Eigen::VectorXd np1 = anti_number_diag(d);
  const CMatrix A = ladder::a_left(rho);
  const CMatrix Ad = ladder::ad_left(rho);
  CMatrix out = (0.5 * gamma * (nbar + 1.0)) *
                (2.0 * ladder::ad_right(A) - scale_rows(n, rho) - scale_cols(rho, n));
  if (nbar != 0.0) {
    out += (0.5 * gamma * nbar) * (2.0 * ladder::a_right(Ad) - scale_rows(np1, rho) - scale_cols(rho, np1));
  }
  return out;
}

}  // namespace

CMatrix rhs_thermal(const CMatrix& rho, double gamma, double nbar) {
  require_square(rho);
  if (!(gamma >= 0) || !(nbar >= 0)) throw DomainError("rhs_thermal: rates must be non-negative");
  return thermal_ladder(rho, gamma, nbar);
}

CMatrix rhs_measurement(const CMatrix& rho, double rate) {
  require_square(rho);
  const CMatrix xr = ladder::x_left(rho);
  const CMatrix xrx = ladder::x_right(xr);
  const CMatrix xxr = ladder::x_left(xr);
  const CMatrix rxx = ladder::x_right(ladder::x_right(rho));
  return (-0.5 * rate) * (xxr - 2.0 * xrx + rxx);
}

CMatrix rhs_generic_feedback(const CMatrix& rho, const ModelParams& p) {
  require_square(rho);
  p.validate();
  const int d = static_cast<int>(rho.rows());
  const double fb_noise = feedback_noise_rate(p);

  const CMatrix a = annihilation(d).data();
  const CMatrix ad = a.adjoint();
  const CMatrix X = quadrature(d, 0.0).data();
  const CMatrix B = a - ad;

  const OperatorMatrix lower(a), raise(ad);
  CMatrix out = p.gamma * (p.nbar + 1.0) * dissipator(lower, rho) + p.gamma * p.nbar * dissipator(raise, rho);
  out -= (p.measurement_rate() / 2.0) * commutator(X, commutator(X, rho));

  if (p.g != 0.0) {
    const auto [s, c] = sin_cos_phase(p.phi);
    const cplx e_plus(c, s);
    const cplx I(0.0, 1.0);
    auto K = [&](const CMatrix& m) -> CMatrix { return (p.g / 2.0) * commutator(B, m); };
    out += K(I * e_plus * rho * X - I * std::conj(e_plus) * X * rho);
    // K^2 rho / (2 eta chi^2 / kappa); fb_noise = g^2 kappa / (4 eta chi^2)
    out += (fb_noise / (p.g * p.g / 2.0)) * K(K(rho));
  }
  return out;
}

CMatrix rhs_final_feedback(const CMatrix& rho, const ModelParams& p) {
  require_square(rho);
  const EffectiveBath bath = effective_bath(p);
  require_physical(bath);
  const Eigen::Index d = rho.rows();
  const Eigen::VectorXd n = number_diag(d);
  const Eigen::VectorXd np1 = anti_number_diag(d);

  const CMatrix A = ladder::a_left(rho);    // a rho
  const CMatrix Ad = ladder::ad_left(rho);  // a^dag rho
  const CMatrix Ra = ladder::a_right(rho);  // rho a
  const CMatrix Rad = ladder::ad_right(rho);  // rho a^dag

  const CMatrix aa_r = ladder::a_left(A);
  const CMatrix adad_r = ladder::ad_left(Ad);
  const CMatrix r_aa = ladder::a_right(Ra);
  const CMatrix r_adad = ladder::ad_right(Rad);

  const double G = bath.Gamma;
  CMatrix out = (0.5 * G * (bath.N + 1.0)) * (2.0 * ladder::ad_right(A) - scale_rows(n, rho) - scale_cols(rho, n));
  out += (0.5 * G * bath.N) * (2.0 * ladder::a_right(Ad) - scale_rows(np1, rho) - scale_cols(rho, np1));
  out -= (0.5 * G * bath.M) * (2.0 * ladder::ad_right(Ad) - adad_r - r_adad);
  out -= (0.5 * G * std::conj(bath.M)) * (2.0 * ladder::a_right(A) - aa_r - r_aa);
  const double s = p.feedback_drift();
  if (s != 0.0) out -= (0.25 * s) * ((aa_r - adad_r) - (r_aa - r_adad));
  return out;
}

Generator::Generator(RhsSpec spec) : spec_(std::move(spec)) {
  const ModelParams& p = spec_.params;
  p.validate();
  switch (spec_.kind) {
    case RhsKind::thermal:
      break;
    case RhsKind::generic_feedback:
      feedback_noise_rate(p);
      bath_ = effective_bath(p);
      break;
    case RhsKind::final_feedback:
      bath_ = effective_bath(p);
      require_physical(bath_);
      break;
  }
}

CMatrix Generator::apply(const CMatrix& rho) const {
  switch (spec_.kind) {
    case RhsKind::thermal: return rhs_thermal(rho, spec_.params.gamma, spec_.params.nbar);
    case RhsKind::generic_feedback: return rhs_generic_feedback(rho, spec_.params);
    case RhsKind::final_feedback: return rhs_final_feedback(rho, spec_.params);
  }
  return {};
}

double Generator::fastest_rate() const {
  const ModelParams& p = spec_.params;
  double rate = p.gamma * (p.nbar + 1.0);
  if (spec_.kind != RhsKind::thermal) {
    rate = std::max({rate, std::abs(bath_.Gamma) * (bath_.N + 1.0), p.measurement_rate(), std::abs(p.g)});
  }
  return rate;
}

namespace {

using Sp = Eigen::SparseMatrix<cplx>;

Sp sparse_from(const CMatrix& m) { return m.sparseView(); }

// vec(A rho B) = (B^T kron A) vec(rho), column-major.
Sp sandwich(const Sp& A, const Sp& B) { return Eigen::kroneckerProduct(Sp(B.transpose()), A).eval(); }

Sp identity(int d) {
  Sp I(d, d);
  I.setIdentity();
  return I;
}

Sp left_mul(const Sp& A, int d) { return sandwich(A, identity(d)); }
Sp right_mul(const Sp& B, int d) { return sandwich(identity(d), B); }

// Superoperator of D[L] rho.
Sp dissipator_super(const Sp& L, int d) {
  const Sp Ld = L.adjoint();
  const Sp LdL = Ld * L;
  return sandwich(L, Ld) - 0.5 * left_mul(LdL, d) - 0.5 * right_mul(LdL, d);
}

Sp commutator_super(const Sp& A, int d) { return left_mul(A, d) - right_mul(A, d); }

}  // namespace

SparseSuperop Generator::superoperator(int dim) const {
  const ModelParams& p = spec_.params;
  const int d = dim;
  const Sp a = sparse_from(annihilation(d).data());
  const Sp ad = a.adjoint();
  const Sp aa = a * a;
  const Sp adad = ad * ad;

  Sp S = p.gamma * (p.nbar + 1.0) * dissipator_super(a, d) + p.gamma * p.nbar * dissipator_super(ad, d);
  if (spec_.kind == RhsKind::thermal) {
    S.makeCompressed();
    return S;
  }

  if (spec_.kind == RhsKind::generic_feedback) {
    const Sp X = 0.5 * (a + ad);
    const Sp B = a - ad;
    const Sp comX = commutator_super(X, d);
    S -= (p.measurement_rate() / 2.0) * Sp(comX * comX);
    if (p.g != 0.0) {
      const auto [s, c] = sin_cos_phase(p.phi);
      const cplx e_plus(c, s);
      const cplx I(0.0, 1.0);
      const Sp K = (p.g / 2.0) * commutator_super(B, d);
      const Sp inner = (I * e_plus) * right_mul(X, d) - (I * std::conj(e_plus)) * left_mul(X, d);
      S += Sp(K * inner);
      const double fb_noise = feedback_noise_rate(p);
      S += (fb_noise / (p.g * p.g / 2.0)) * Sp(K * K);
    }
  } else {
    const Sp n_op = ad * a;
    const Sp anti_n = a * ad;
    const double G = bath_.Gamma;
    S = (0.5 * G * (bath_.N + 1.0)) * Sp(2.0 * sandwich(a, ad) - left_mul(n_op, d) - right_mul(n_op, d));
    S += (0.5 * G * bath_.N) * Sp(2.0 * sandwich(ad, a) - left_mul(anti_n, d) - right_mul(anti_n, d));
    S -= (0.5 * G * bath_.M) * Sp(2.0 * sandwich(ad, ad) - left_mul(adad, d) - right_mul(adad, d));
    S -= (0.5 * G * std::conj(bath_.M)) * Sp(2.0 * sandwich(a, a) - left_mul(aa, d) - right_mul(aa, d));
    S -= (0.25 * p.feedback_drift()) * commutator_super(Sp(aa - adad), d);
  }
  S.prune(cplx(0.0, 0.0));
  S.makeCompressed();
  return S;
}

double spectral_radius_estimate(const Generator& gen, int dim) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal;
  CMatrix v(dim, dim);
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = cplx(normal(rng), normal(rng));

  constexpr int kWarmup = 60;
  constexpr int kMeasure = 30;
  double log_growth = 0.0;
  for (int k = 0; k < kWarmup + kMeasure; ++k) {
    CMatrix w = gen.apply(v);
    const double norm_v = v.norm();
    const double norm_w = w.norm();
    if (norm_w == 0.0) return 0.0;
    if (k >= kWarmup) log_growth += std::log(norm_w / norm_v);
    v = w / norm_w;
  }
  return std::exp(log_growth / kMeasure);
}

namespace {

void check_tail(const CMatrix& rho, double warn_level, double error_level, double t) {
  const int d = static_cast<int>(rho.rows());
  const double tail = tail_mass(rho, default_tail_margin(d));
  if (tail > error_level) {
    std::ostringstream os;
    os << "truncation overflow at t=" << t << ": tail mass " << tail << " > " << error_level << " (dim " << d << ")";
    throw TruncationError(os.str());
  }
  if (tail > warn_level) {
    std::ostringstream os;
    os << "truncation warning at t=" << t << ": tail mass " << tail << " (dim " << d << ")";
    warn(os.str());
  }
}

}  // namespace

EvolveResult evolve(const DensityMatrix& rho0, const Generator& gen, const EvolveOptions& opts,
                    const StepObserver& observer) {
  if (!(opts.dt > 0) || !(opts.t_final >= 0)) throw StepSizeError("evolve: dt must be > 0 and t_final >= 0");
  const double bound = 0.1 / gen.fastest_rate();
  if (opts.dt > bound) {
    std::ostringstream os;
    os << "evolve: dt = " << opts.dt << " exceeds 0.1 / fastest rate = " << bound;
    throw StepSizeError(os.str());
  }
  const int d = rho0.dim();
  const double radius = spectral_radius_estimate(gen, d);
  if (opts.dt * radius * 1.05 > 2.5) {
    std::ostringstream os;
    os << "evolve: dt = " << opts.dt << " outside the RK4 stability region of the truncated generator "
       << "(spectral radius ~" << radius << ", need dt < " << 2.5 / (1.05 * radius) << ")";
    throw StepSizeError(os.str());
  }

  const long n_steps = std::lround(opts.t_final / opts.dt);
  if (std::abs(n_steps * opts.dt - opts.t_final) > 1e-9 * std::max(1.0, opts.t_final)) {
    throw StepSizeError("evolve: t_final must be an integer multiple of dt");
  }
  const int n_cp = std::max(1, opts.n_checkpoints);

  EvolveResult result;
  CMatrix rho = rho0.data();
  auto record = [&](double t) {
    result.times.push_back(t);
    result.states.push_back(rho);
    if (opts.check_positivity) result.min_eigenvalue = std::min(result.min_eigenvalue, min_eigenvalue(rho));
    result.max_tail_mass = std::max(result.max_tail_mass, tail_mass(rho, default_tail_margin(d)));
    check_tail(rho, opts.tail_warn, opts.tail_error, t);
  };
  record(0.0);
  if (observer) observer(0, 0.0, rho);

  long next_cp = 1;
  auto cp_step = [&](long k) { return (k * n_steps) / n_cp; };
  const double h = opts.dt;
  for (long step = 1; step <= n_steps; ++step) {
    const cplx tr_before = rho.trace();
    const CMatrix k1 = gen.apply(rho);
    const CMatrix k2 = gen.apply(rho + (0.5 * h) * k1);
    const CMatrix k3 = gen.apply(rho + (0.5 * h) * k2);
    const CMatrix k4 = gen.apply(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    result.max_trace_drift = std::max(result.max_trace_drift, std::abs(rho.trace() - tr_before));
    result.max_hermitian_deviation = std::max(result.max_hermitian_deviation, max_hermitian_deviation(rho));
    const double t = step * h;
    if (observer) observer(step, t, rho);
    while (next_cp <= n_cp && cp_step(next_cp) == step) {
      record(t);
      ++next_cp;
    }
  }
  result.steps = n_steps;
  return result;
}

namespace {

CMatrix null_space_solve(const Generator& gen, int d) {
  const Sp S = gen.superoperator(d);
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(S.nonZeros() + d);
  for (Eigen::Index col = 0; col < S.outerSize(); ++col) {
    for (Sp::InnerIterator it(S, col); it; ++it) {
      if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  // Row 0 (the |0><0| element) replaced by the trace functional.
  for (int i = 0; i < d; ++i) trip.emplace_back(0, static_cast<Eigen::Index>(i) * d + i, cplx(1.0, 0.0));
  Sp system(n, n);
  system.setFromTriplets(trip.begin(), trip.end());
  system.makeCompressed();

  Eigen::SparseLU<Sp> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) throw ConvergenceError("steady state: sparse LU factorization failed");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs(0) = 1.0;
  const Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw ConvergenceError("steady state: sparse LU solve failed");
  return Eigen::Map<const CMatrix>(x.data(), d, d);
}

CMatrix integrate_to_steady(const Generator& gen, int d, const SteadyOptions& opts) {
  const double radius = spectral_radius_estimate(gen, d);
  double dt = opts.dt > 0 ? opts.dt : std::min(0.1 / gen.fastest_rate(), 2.0 / radius);
  const ModelParams& p = gen.spec().params;
  const double slowest = std::min({p.gamma, p.gamma - 2.0 * p.feedback_drift(), p.gamma - p.feedback_drift()});
  const double budget = opts.max_time > 0 ? opts.max_time : 60.0 / slowest;
  const double chunk = std::max(dt, std::ceil(1.0 / (slowest * dt)) * dt);

  EvolveOptions eo;
  eo.dt = dt;
  eo.t_final = chunk;
  eo.n_checkpoints = 1;
  eo.tail_warn = opts.tail_warn;
  eo.tail_error = opts.tail_error;
  eo.check_positivity = false;

  DensityMatrix rho = DensityMatrix::thermal(d, p.nbar);
  double t = 0.0;
  while (t < budget) {
    EvolveResult r = evolve(rho, gen, eo);
    t += chunk;
    const CMatrix& last = r.states.back();
    const double residual = gen.apply(last).cwiseAbs().maxCoeff();
    if (residual <= opts.tol) return last;
    DensityMatrix::Tolerances loose;
    loose.hermitian = 1e-9;
    loose.trace = 1e-8;
    rho = DensityMatrix(last, loose);
  }
  std::ostringstream os;
  os << "steady state: integration did not reach residual " << opts.tol << " within t = " << budget;
  throw ConvergenceError(os.str());
}

}  // namespace

SteadyResult steady_state(const RhsSpec& spec, const SteadyOptions& opts) {
  if (spec.kind != RhsKind::thermal) require_stable(spec.params);
  const Generator gen(spec);
  int d = opts.dim;
  if (d < 2) throw DomainError("steady state: dim must be >= 2");
  while (true) {
    SteadyResult r;
    r.dim = d;
    r.rho = opts.method == SteadyMethod::null_space ? null_space_solve(gen, d) : integrate_to_steady(gen, d, opts);
    r.residual = gen.apply(r.rho).cwiseAbs().maxCoeff();
    r.tail = tail_mass(r.rho, default_tail_margin(d));
    if (r.residual > opts.tol) {
      std::ostringstream os;
      os << "steady state: residual " << r.residual << " exceeds tolerance " << opts.tol;
      throw ConvergenceError(os.str());
    }
    if (r.tail > opts.tail_warn && opts.auto_grow && 2 * d <= opts.max_dim) {
      d *= 2;
      continue;
    }
    if (r.tail > opts.tail_error) {
      std::ostringstream os;
      os << "steady state: tail mass " << r.tail << " at dim " << d << " exceeds " << opts.tail_error;
      throw TruncationError(os.str());
    }
    if (r.tail > opts.tail_warn) {
      std::ostringstream os;
      os << "steady state: tail mass " << r.tail << " at dim " << d;
      warn(os.str());
    }
    return r;
  }
}

MomentDynamics moment_dynamics(const ModelParams& p) {
  p.validate();
  const double s = p.feedback_drift();
  const double backaction = p.chi * p.chi / (4.0 * p.kappa);
  const double fb_noise = feedback_noise_rate(p);
  MomentDynamics m;
  m.A << s - p.gamma, s, 0.0,
         s, s - p.gamma, 0.0,
         0.0, 0.0, s - p.gamma;
  m.b << p.gamma * p.nbar + backaction + fb_noise + 0.5 * s,
         -backaction + fb_noise + 0.5 * s,
         0.5 * p.g * p.cos_phi();
  return m;
}

Eigen::Matrix2d first_moment_drift(const ModelParams& p) {
  Eigen::Matrix2d F;
  F << -0.5 * p.gamma + p.feedback_drift(), 0.0,
       0.0, -0.5 * p.gamma;
  return F;
}

StationaryGaussian moment_oracle(const ModelParams& p) {
  const MomentDynamics m = moment_dynamics(p);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(m.A);
  lu.setThreshold(1e-14);
  if (!lu.isInvertible()) throw SingularParameters("moment equations are singular (stability boundary)");
  require_stable(p);
  const Eigen::Vector3d v = lu.solve(-m.b);
  return StationaryGaussian{v(0), cplx(v(1), v(2))};
}

}  // namespace squash
