#include "qdb/matrix_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "qdb/errors.hpp"

namespace qdb {

namespace {

struct WorstPair {
  Index row = 0;
  Index col = 0;
  double deviation = 0.0;
};

WorstPair worst_hermitian_pair(const CMatrix& m) {
  WorstPair worst;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double dev = std::abs(m(i, j) - std::conj(m(j, i)));
      if (dev > worst.deviation) worst = {i, j, dev};
    }
  }
  return worst;
}

void require_hermitian(const CMatrix& m, double tolerance, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
  const WorstPair w = worst_hermitian_pair(m);
  if (!(w.deviation <= tolerance)) {
    std::ostringstream os;
    os << what << ": matrix is not Hermitian; entries (" << w.row << "," << w.col << ") and ("
       << w.col << "," << w.row << ") differ from conjugate symmetry by " << w.deviation
       << " (tolerance " << tolerance << ")";
    throw ValidationError(os.str());
  }
}

CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

double hermiticity_error(const CMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return worst_hermitian_pair(m).deviation;
}

void require_square(const CMatrix& m, Index dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) {
    std::ostringstream os;
    os << what << ": expected " << dim << "x" << dim << ", got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
}

void require_same_shape(const CMatrix& a, const CMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw ValidationError(os.str());
  }
}

// ---------------------------------------------------------------------------
// HermitianMatrix / DensityMatrix

HermitianMatrix::HermitianMatrix(const CMatrix& m, double tolerance) {
  require_hermitian(m, tolerance, "HermitianMatrix");
  m_ = hermitize(m);
}

HermitianMatrix HermitianMatrix::from_real(const RMatrix& m, double tolerance) {
  return HermitianMatrix(m.cast<Complex>(), tolerance);
}

HermitianMatrix HermitianMatrix::identity(Index dim) {
  return HermitianMatrix(CMatrix::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::zero(Index dim) {
  return HermitianMatrix(CMatrix::Zero(dim, dim));
}

DensityMatrix::DensityMatrix(const CMatrix& m, DensityTolerance tolerance) {
  require_hermitian(m, tolerance.hermitian, "DensityMatrix");
  if (m.rows() == 0) throw ValidationError("DensityMatrix: empty matrix");
  CMatrix h = hermitize(m);
  const double tr = h.trace().real();
  if (std::abs(tr - 1.0) > tolerance.trace) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr << " differs from 1 by more than " << tolerance.trace;
    throw ValidationError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin < -tolerance.eigenvalue) {
    std::ostringstream os;
    os << "DensityMatrix: eigenvalue " << lmin << " below -" << tolerance.eigenvalue
       << " (not positive semidefinite)";
    throw DomainError(os.str());
  }
  m_ = std::move(h);
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::from_pure(const CVector& psi, double epsilon) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw ValidationError("DensityMatrix::from_pure: zero state vector");
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw ValidationError("DensityMatrix::from_pure: mixing epsilon outside [0, 1]");
  }
  const CVector u = psi / n;
  const Index d = psi.size();
  CMatrix rho = (1.0 - epsilon) * (u * u.adjoint()) +
                (epsilon / static_cast<double>(d)) * CMatrix::Identity(d, d);
  return DensityMatrix(rho);
}

// ---------------------------------------------------------------------------
// Spectral functions

EigenDecomposition herm_eig(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.matrix());
  if (es.info() != Eigen::Success) throw NumericalError("herm_eig: eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

EigenDecomposition herm_eig(const CMatrix& m, double tolerance) {
  return herm_eig(HermitianMatrix(m, tolerance));
}

CMatrix hermitian_function(const EigenDecomposition& eig, const std::function<double(double)>& f) {
  RVector fv(eig.values.size());
  for (Index i = 0; i < fv.size(); ++i) fv(i) = f(eig.values(i));
  return eig.vectors * fv.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

HermitianMatrix matrix_log_psd(const DensityMatrix& m, double floor) {
  if (!(floor > 0.0)) throw ValidationError("matrix_log_psd: floor must be positive");
  const EigenDecomposition eig = herm_eig(m.as_hermitian());
  const double lmin = eig.values.minCoeff();
  if (lmin < -1e-10) {
    std::ostringstream os;
    os << "matrix_log_psd: PSD violation, eigenvalue " << lmin;
    throw DomainError(os.str());
  }
  return HermitianMatrix(
      hermitian_function(eig, [floor](double x) { return std::log(std::max(x, floor)); }), 1e-10);
}

CMatrix matrix_exp(const CMatrix& m) {
  if (m.rows() != m.cols()) throw ValidationError("matrix_exp: matrix must be square");
  if (m.rows() == 0) return m;
  return m.exp();
}

CMatrix matrix_exp(const HermitianMatrix& h, Complex factor) {
  const EigenDecomposition eig = herm_eig(h);
  CVector ev(eig.values.size());
  for (Index i = 0; i < ev.size(); ++i) ev(i) = std::exp(factor * eig.values(i));
  return eig.vectors * ev.asDiagonal() * eig.vectors.adjoint();
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "commutator");
  if (a.rows() != a.cols()) throw ValidationError("commutator: operands must be square");
  return a * b - b * a;
}

CMatrix anticommutator(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "anticommutator");
  if (a.rows() != a.cols()) throw ValidationError("anticommutator: operands must be square");
  return a * b + b * a;
}

Complex hs_inner(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "hs_inner");
  // Tr(b^dagger a) = sum_ij conj(b_ij) a_ij
  return (b.conjugate().cwiseProduct(a)).sum();
}

double entropy_of_spectrum(const RVector& eigenvalues, double floor) {
  double s = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    const double p = eigenvalues(i);
    if (p > floor) s -= p * std::log(p);
  }
  return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  return entropy_of_spectrum(es.eigenvalues());
}

// ---------------------------------------------------------------------------
// Vectorization

CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, Index rows) {
  if (rows <= 0 || v.size() % rows != 0) throw ValidationError("unvec: size mismatch");
  return Eigen::Map<const CMatrix>(v.data(), rows, v.size() / rows);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }
RMatrix kron(const RMatrix& a, const RMatrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

double frobenius_distance(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "frobenius_distance");
  return (a - b).norm();
}

// ---------------------------------------------------------------------------
// Lyapunov

double spectral_abscissa(const RMatrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("spectral_abscissa: matrix must be square");
  if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<RMatrix> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

RMatrix solve_sylvester_lyapunov(const RMatrix& a, const RMatrix& q) {
  if (a.rows() != a.cols() || q.rows() != q.cols() || a.rows() != q.rows()) {
    throw ValidationError("solve_sylvester_lyapunov: a and q must be square and of equal size");
  }
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff())) {
    throw ValidationError("solve_sylvester_lyapunov: q must be symmetric");
  }
  const double abscissa = spectral_abscissa(a);
  if (abscissa >= -1e-12) {
    std::ostringstream os;
    os << "solve_sylvester_lyapunov: a is not asymptotically stable (max Re lambda = "
       << abscissa << ")";
    throw DomainError(os.str());
  }
  const Index n = a.rows();
  const RMatrix eye = RMatrix::Identity(n, n);
  const RMatrix k = kron(eye, a) + kron(a, eye);
  Eigen::FullPivLU<RMatrix> lu(k);
  if (!lu.isInvertible()) {
    throw NumericalError("solve_sylvester_lyapunov: singular Kronecker system (degenerate spectrum)");
  }
  const RVector rhs = -Eigen::Map<const RVector>(q.data(), q.size());
  const RVector x = lu.solve(rhs);
  RMatrix v = Eigen::Map<const RMatrix>(x.data(), n, n);
  v = 0.5 * (v + v.transpose()).eval();
  const double residual = (a * v + v * a.transpose() + q).norm();
  if (residual > 1e-10 * std::max(q.norm(), 1e-300) && residual > 1e-13) {
    std::ostringstream os;
    os << "solve_sylvester_lyapunov: residual " << residual << " exceeds 1e-10 * ||q||";
    throw NumericalError(os.str());
  }
  return v;
}

}  // namespace qdb
