#include "squash/hilbert.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "squash/errors.hpp"

namespace squash {

OperatorMatrix::OperatorMatrix(CMatrix data) : data_(std::move(data)) {
  if (data_.rows() != data_.cols()) throw DomainError("operator matrix must be square");
}

DensityMatrix::DensityMatrix(CMatrix data, const Tolerances& tol) : data_(std::move(data)) {
  if (data_.rows() != data_.cols() || data_.rows() < 1) throw DomainError("density matrix must be square");
  const double herm = max_hermitian_deviation(data_);
  if (herm > tol.hermitian) {
    std::ostringstream os;
    os << "density matrix not Hermitian (max deviation " << herm << ")";
    throw DomainError(os.str());
  }
  const cplx tr = data_.trace();
  if (std::abs(tr - 1.0) > tol.trace) {
    std::ostringstream os;
    os.precision(17);
    os << "density matrix trace " << tr.real() << " differs from 1";
    throw DomainError(os.str());
  }
  const double lmin = min_eigenvalue(data_);
  if (lmin < tol.min_eigenvalue) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << lmin;
    throw DomainError(os.str());
  }
}

DensityMatrix DensityMatrix::fock(int dim, int n) {
  if (dim < 1 || n < 0 || n >= dim) throw DomainError("Fock index outside the truncated basis");
  CMatrix m = CMatrix::Zero(dim, dim);
  m(n, n) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::thermal(int dim, double nbar) {
  if (dim < 1) throw DomainError("dimension must be >= 1");
  if (!(nbar >= 0)) throw DomainError("nbar must be >= 0");
  CMatrix m = CMatrix::Zero(dim, dim);
  const double ratio = nbar / (nbar + 1.0);
  double p = 1.0 / (nbar + 1.0);
  double total = 0.0;
  for (int k = 0; k < dim; ++k) {
    m(k, k) = p;
    total += p;
    p *= ratio;
  }
  m /= total;
  return DensityMatrix(std::move(m));
}

OperatorMatrix annihilation(int dim) {
  if (dim < 2) throw DomainError("truncation dimension must be >= 2");
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int i = 0; i + 1 < dim; ++i) a(i, i + 1) = std::sqrt(static_cast<double>(i + 1));
  return OperatorMatrix(std::move(a));
}

OperatorMatrix creation(int dim) { return annihilation(dim).adjoint(); }

OperatorMatrix number_operator(int dim) {
  const CMatrix a = annihilation(dim).data();
  return OperatorMatrix(a.adjoint() * a);
}

OperatorMatrix quadrature(int dim, double theta) {
  const CMatrix a = annihilation(dim).data();
  const cplx phase = std::polar(1.0, theta);
  return OperatorMatrix(0.5 * (phase * a + std::conj(phase) * a.adjoint()));
}

CMatrix commutator(const CMatrix& A, const CMatrix& B) { return A * B - B * A; }

CMatrix dissipator(const OperatorMatrix& L, const CMatrix& rho) {
  if (L.dim() != rho.rows() || rho.rows() != rho.cols()) throw DomainError("dissipator: shape mismatch");
  const CMatrix& l = L.data();
  const CMatrix ldl = l.adjoint() * l;
  return l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
}

double max_hermitian_deviation(const CMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

double min_eigenvalue(const CMatrix& hermitian) {
  const CMatrix sym = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double purity(const CMatrix& rho) {
  // Tr(rho^2) = sum_ij rho_ij rho_ji
  return (rho.cwiseProduct(rho.transpose())).sum().real();
}

double Moments::var_x(double theta) const {
  const double second = 0.25 * (1.0 + 2.0 * mean_n + 2.0 * (mean_aa * std::polar(1.0, 2.0 * theta)).real());
  const double first = mean_x(theta);
  return second - first * first;
}

Moments moments(const CMatrix& rho) {
  Moments m;
  m.mean_a = ladder::expect_a(rho);
  m.mean_aa = ladder::expect_aa(rho);
  m.mean_n = ladder::expect_n(rho).real();
  return m;
}

double tail_mass(const CMatrix& rho, int margin) {
  const int d = static_cast<int>(rho.rows());
  if (margin < 0 || margin >= d) throw DomainError("tail margin must lie in [0, dim)");
  double total = 0.0;
  for (int k = d - margin; k < d; ++k) total += rho(k, k).real();
  return total;
}

int default_tail_margin(int dim) { return std::max(1, dim / 6); }

namespace ladder {

namespace {

const std::vector<double>& sqrt_table(int n) {
  thread_local std::vector<double> table;
  if (static_cast<int>(table.size()) < n) {
    table.resize(n);
    for (int i = 0; i < n; ++i) table[i] = std::sqrt(static_cast<double>(i));
  }
  return table;
}

}  // namespace

CMatrix a_left(const CMatrix& r) {
  const Eigen::Index d = r.rows();
  const auto& sq = sqrt_table(static_cast<int>(d) + 1);
  CMatrix out(d, r.cols());
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    for (Eigen::Index i = 0; i + 1 < d; ++i) out(i, j) = sq[i + 1] * r(i + 1, j);
    out(d - 1, j) = 0.0;
  }
  return out;
}

CMatrix ad_left(const CMatrix& r) {
  const Eigen::Index d = r.rows();
  const auto& sq = sqrt_table(static_cast<int>(d) + 1);
  CMatrix out(d, r.cols());
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    out(0, j) = 0.0;
    for (Eigen::Index i = 1; i < d; ++i) out(i, j) = sq[i] * r(i - 1, j);
  }
  return out;
}

CMatrix a_right(const CMatrix& r) {
  const Eigen::Index d = r.cols();
  const auto& sq = sqrt_table(static_cast<int>(d) + 1);
  CMatrix out(r.rows(), d);
  out.col(0).setZero();
  for (Eigen::Index j = 1; j < d; ++j) out.col(j) = sq[j] * r.col(j - 1);
  return out;
}

CMatrix ad_right(const CMatrix& r) {
  const Eigen::Index d = r.cols();
  const auto& sq = sqrt_table(static_cast<int>(d) + 1);
  CMatrix out(r.rows(), d);
  for (Eigen::Index j = 0; j + 1 < d; ++j) out.col(j) = sq[j + 1] * r.col(j + 1);
  out.col(d - 1).setZero();
  return out;
}

CMatrix x_left(const CMatrix& r) {
  const Eigen::Index d = r.rows();
  const auto& sq = sqrt_table(static_cast<int>(d) + 1);
  CMatrix out(d, r.cols());
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      cplx v = 0.0;
      if (i + 1 < d) v += sq[i + 1] * r(i + 1, j);
      if (i > 0) v += sq[i] * r(i - 1, j);
      out(i, j) = 0.5 * v;
    }
  }
  return out;
}

CMatrix x_right(const CMatrix& r) {
  const Eigen::Index d = r.cols();
  const auto& sq = sqrt_table(static_cast<int>(d) + 1);
  CMatrix out(r.rows(), d);
  for (Eigen::Index j = 0; j < d; ++j) {
    out.col(j).setZero();
    if (j > 0) out.col(j) += (0.5 * sq[j]) * r.col(j - 1);
    if (j + 1 < d) out.col(j) += (0.5 * sq[j + 1]) * r.col(j + 1);
  }
  return out;
}

cplx expect_a(const CMatrix& r) {
  const Eigen::Index d = r.rows();
  cplx s = 0.0;
  for (Eigen::Index i = 0; i + 1 < d; ++i) s += std::sqrt(static_cast<double>(i + 1)) * r(i + 1, i);
  return s;
}

cplx expect_aa(const CMatrix& r) {
  const Eigen::Index d = r.rows();
  cplx s = 0.0;
  for (Eigen::Index i = 0; i + 2 < d; ++i) {
    s += std::sqrt(static_cast<double>((i + 1) * (i + 2))) * r(i + 2, i);
  }
  return s;
}

cplx expect_n(const CMatrix& r) {
  cplx s = 0.0;
  for (Eigen::Index i = 1; i < r.rows(); ++i) s += static_cast<double>(i) * r(i, i);
  return s;
}

cplx expect_x(const CMatrix& r) {
  const Eigen::Index d = r.rows();
  cplx s = 0.0;
  for (Eigen::Index i = 0; i + 1 < d; ++i) {
    const double w = std::sqrt(static_cast<double>(i + 1));
    s += w * (r(i + 1, i) + r(i, i + 1));
  }
  return 0.5 * s;
}

}  // namespace ladder

}  // namespace squash
