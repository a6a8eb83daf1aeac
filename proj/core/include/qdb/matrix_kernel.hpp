#pragma once

// Dense complex linear algebra shared by every other module. Dimensions in
// this library stay below ~64 (a 4096-dim Fock space is only ever used for
// matrix products, never vectorized), so everything here is dense.

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace qdb {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kLogFloor = 1e-14;

/// Largest |m(i,j) - conj(m(j,i))| over all entries.
double hermiticity_error(const CMatrix& m);

/// A square matrix equal to its conjugate transpose within kHermitianTolerance
/// (absolute, per entry). The stored matrix is exactly Hermitian.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& m, double tolerance = kHermitianTolerance);

  static HermitianMatrix from_real(const RMatrix& m, double tolerance = kHermitianTolerance);
  static HermitianMatrix identity(Index dim);
  static HermitianMatrix zero(Index dim);

  Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

/// Tolerances used when validating a density matrix. Defaults are the strict
/// invariant; evolution results are admitted with looser eigenvalue/trace
/// bounds.
struct DensityTolerance {
  double hermitian = kHermitianTolerance;
  double eigenvalue = 1e-10;
  double trace = 1e-10;
};

/// Hermitian, positive semidefinite, unit trace.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(const CMatrix& m, DensityTolerance tolerance = {});

  static DensityMatrix maximally_mixed(Index dim);
  /// (1 - epsilon)|psi><psi| + epsilon 1/d, with psi normalized first.
  static DensityMatrix from_pure(const CVector& psi, double epsilon = 1e-6);

  Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  HermitianMatrix as_hermitian() const { return HermitianMatrix(m_); }

 private:
  CMatrix m_;
};

struct EigenDecomposition {
  RVector values;   ///< ascending
  CMatrix vectors;  ///< unitary, columns are eigenvectors
};

/// Hermitian eigendecomposition m = U diag(values) U^dagger.
EigenDecomposition herm_eig(const HermitianMatrix& m);
/// Validating overload; throws ValidationError naming the worst entry pair.
EigenDecomposition herm_eig(const CMatrix& m, double tolerance = kHermitianTolerance);

/// U diag(f(lambda)) U^dagger.
CMatrix hermitian_function(const EigenDecomposition& eig, const std::function<double(double)>& f);

/// U diag(ln max(lambda, floor)) U^dagger. Throws DomainError when an
/// eigenvalue is below -1e-10.
HermitianMatrix matrix_log_psd(const DensityMatrix& m, double floor = kLogFloor);

/// Scaling-and-squaring Pade exponential.
CMatrix matrix_exp(const CMatrix& m);
/// Eigen-based exponential of a Hermitian matrix scaled by a complex factor:
/// exp(factor * h).
CMatrix matrix_exp(const HermitianMatrix& h, Complex factor = 1.0);

CMatrix commutator(const CMatrix& a, const CMatrix& b);
CMatrix anticommutator(const CMatrix& a, const CMatrix& b);

/// <a, b> = Tr(b^dagger a).
Complex hs_inner(const CMatrix& a, const CMatrix& b);

/// -Tr(rho ln rho) in nats, with 0 ln 0 = 0.
double von_neumann_entropy(const DensityMatrix& rho);
/// Same, from a spectrum. Eigenvalues below `floor` contribute nothing.
double entropy_of_spectrum(const RVector& eigenvalues, double floor = kLogFloor);

/// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, Index rows);
CMatrix kron(const CMatrix& a, const CMatrix& b);
RMatrix kron(const RMatrix& a, const RMatrix& b);

/// Largest real part among the eigenvalues of a real matrix.
double spectral_abscissa(const RMatrix& a);

/// Solves a V + V a^T + q = 0 for symmetric V through the Kronecker system
/// (I kron a + a kron I) vec(V) = -vec(q). Requires every eigenvalue of `a`
/// to have real part below -1e-12.
RMatrix solve_sylvester_lyapunov(const RMatrix& a, const RMatrix& q);

/// Frobenius norm of a - b; throws on shape mismatch.
double frobenius_distance(const CMatrix& a, const CMatrix& b);

/// Throws ValidationError unless `m` is square with `dim` rows.
void require_square(const CMatrix& m, Index dim, const char* what);
void require_same_shape(const CMatrix& a, const CMatrix& b, const char* what);

}  // namespace qdb
