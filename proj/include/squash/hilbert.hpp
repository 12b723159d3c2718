#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace squash {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

/// Dense operator on the truncated number basis |0>..|d-1>.
class OperatorMatrix {
 public:
  explicit OperatorMatrix(CMatrix data);

  int dim() const { return static_cast<int>(data_.rows()); }
  const CMatrix& data() const { return data_; }
  OperatorMatrix adjoint() const { return OperatorMatrix(data_.adjoint()); }

 private:
  CMatrix data_;
};

/// Hermitian, unit-trace, numerically positive matrix.
class DensityMatrix {
 public:
  struct Tolerances {
    double hermitian = 1e-12;
    double trace = 1e-10;
    double min_eigenvalue = -1e-8;
  };

  /// Validates the invariants; throws DomainError on violation.
  explicit DensityMatrix(CMatrix data, const Tolerances& tol);
  explicit DensityMatrix(CMatrix data) : DensityMatrix(std::move(data), Tolerances{}) {}

  static DensityMatrix fock(int dim, int n);
  static DensityMatrix vacuum(int dim) { return fock(dim, 0); }
  /// Truncated geometric populations n^k / (n+1)^{k+1}, renormalized on the truncated space.
  static DensityMatrix thermal(int dim, double nbar);

  int dim() const { return static_cast<int>(data_.rows()); }
  const CMatrix& data() const { return data_; }

 private:
  CMatrix data_;
};

OperatorMatrix annihilation(int dim);
OperatorMatrix creation(int dim);
OperatorMatrix number_operator(int dim);
/// X_theta = (a e^{i theta} + a^dag e^{-i theta}) / 2.
OperatorMatrix quadrature(int dim, double theta);

/// D[L] rho = L rho L^dag - (L^dag L rho + rho L^dag L) / 2.
CMatrix dissipator(const OperatorMatrix& L, const CMatrix& rho);
CMatrix commutator(const CMatrix& A, const CMatrix& B);

double max_hermitian_deviation(const CMatrix& m);
double min_eigenvalue(const CMatrix& hermitian);
double purity(const CMatrix& rho);

struct Moments {
  cplx mean_a{0.0, 0.0};
  cplx mean_aa{0.0, 0.0};
  double mean_n = 0.0;

  /// Var(X_theta) = (1/4)[1 + 2<n> + 2 Re(<a^2> e^{2 i theta})] - (Re(<a> e^{i theta}))^2.
  double var_x(double theta) const;
  double mean_x(double theta) const { return (mean_a * std::polar(1.0, theta)).real(); }
};

Moments moments(const CMatrix& rho);

/// Population in the top `margin` basis states.
double tail_mass(const CMatrix& rho, int margin);

/// Default margin used by the integrators' truncation checks.
int default_tail_margin(int dim);

/// Banded ladder-operator products, O(d^2) each; used by the integrators.
namespace ladder {

CMatrix a_left(const CMatrix& r);    // a r
CMatrix ad_left(const CMatrix& r);   // a^dag r
CMatrix a_right(const CMatrix& r);   // r a
CMatrix ad_right(const CMatrix& r);  // r a^dag
CMatrix x_left(const CMatrix& r);    // X r, X = (a + a^dag)/2
CMatrix x_right(const CMatrix& r);   // r X

/// Tr(a r), Tr(a^2 r), Tr(a^dag a r), Tr(X r) without forming products.
cplx expect_a(const CMatrix& r);
cplx expect_aa(const CMatrix& r);
cplx expect_n(const CMatrix& r);
cplx expect_x(const CMatrix& r);

}  // namespace ladder

}  // namespace squash
