#include "qdb/dqfi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdb/errors.hpp"

namespace qdb {

namespace {

void require_full_rank(const DensityMatrix& rho, const char* what) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > kFullRankThreshold)) {
    std::ostringstream os;
    os << what << ": state is singular (min eigenvalue " << lmin << ")";
    throw DomainError(os.str());
  }
}

double op_norm(const CMatrix& a) { return Eigen::JacobiSVD<CMatrix>(a).singularValues()(0); }

}  // namespace

DensityMatrix UnitaryOrbitFamily::at(double dtheta) const {
  if (generator.dim() != base_state.dim()) {
    throw ValidationError("UnitaryOrbitFamily: generator and state dimensions differ");
  }
  if (!(hbar > 0.0)) throw ValidationError("UnitaryOrbitFamily: hbar must be positive");
  const CMatrix u = matrix_exp(generator, Complex(0.0, -dtheta / hbar));
  return DensityMatrix(u * base_state.matrix() * u.adjoint(), DensityTolerance{1e-10, 1e-10, 1e-10});
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma, double support_floor) {
  require_same_shape(rho.matrix(), sigma.matrix(), "relative_entropy");
  const EigenDecomposition es = herm_eig(sigma.as_hermitian());
  const CMatrix rho_in_sigma = es.vectors.adjoint() * rho.matrix() * es.vectors;
  double cross = 0.0;  // Tr(rho ln sigma)
  for (Index i = 0; i < es.values.size(); ++i) {
    const double weight = rho_in_sigma(i, i).real();
    if (es.values(i) <= support_floor) {
      if (weight > support_floor) {
        std::ostringstream os;
        os << "relative_entropy: rho has weight " << weight
           << " outside the support of sigma; the divergence is +infinity";
        throw DivergenceError(os.str());
      }
      continue;
    }
    cross += weight * std::log(es.values(i));
  }
  return -von_neumann_entropy(rho) - cross;
}

double dqfi_commutator(const DensityMatrix& rho, const HermitianMatrix& c, double hbar) {
  require_same_shape(rho.matrix(), c.matrix(), "dqfi_commutator");
  if (!(hbar > 0.0)) throw ValidationError("dqfi_commutator: hbar must be positive");
  require_full_rank(rho, "dqfi_commutator");
  const CMatrix log_rho = matrix_log_psd(rho).matrix();
  const CMatrix& cm = c.matrix();
  const CMatrix dc = commutator(cm, commutator(cm, log_rho));
  return (rho.matrix().cwiseProduct(dc.transpose())).sum().real() / (hbar * hbar);
}

DqfiEstimate dqfi_finite_difference_estimate(const UnitaryOrbitFamily& f, double h) {
  if (!(h > 0.0)) throw ValidationError("dqfi_finite_difference: h must be positive");
  require_full_rank(f.base_state, "dqfi_finite_difference");
  const auto second_difference = [&f](double step) {
    const double up = relative_entropy(f.at(step), f.base_state);
    const double down = relative_entropy(f.at(-step), f.base_state);
    return (up + down) / (step * step);
  };
  DqfiEstimate e;
  e.coarse = second_difference(h);
  e.fine = second_difference(0.5 * h);
  const double change = std::abs(e.coarse - e.fine);
  const double g = op_norm(f.generator.matrix()) / f.hbar;
  const double limit = 10.0 * h * h * std::max(1.0, std::abs(e.fine)) * std::max(1.0, g * g);
  if (change > limit) {
    std::ostringstream os;
    os << "dqfi_finite_difference: halving h = " << h << " changed the result by " << change
       << " (limit " << limit << "); roundoff dominates, use a larger step";
    throw NumericalError(os.str());
  }
  e.value = e.fine + (e.fine - e.coarse) / 3.0;
  e.curvature = change / (0.75 * h * h);
  e.tolerance = std::max(1e-5, e.curvature * h * h);
  return e;
}

double dqfi_finite_difference(const UnitaryOrbitFamily& f, double h) {
  return dqfi_finite_difference_estimate(f, h).value;
}

double delta_from_dqfi(const LindbladModel& m, const DensityMatrix& rho) {
  require_square(rho.matrix(), m.dim(), "delta_from_dqfi");
  require_full_rank(rho, "delta_from_dqfi");
  const double hb = m.hbar();
  const double root = std::sqrt(hb);
  double sum = 0.0;
  for (std::size_t k = 0; k < m.num_lindblads(); ++k) {
    sum += dqfi_commutator(rho, HermitianMatrix(root * m.split().a_ops[k].matrix()), hb);
    sum += dqfi_commutator(rho, HermitianMatrix(root * m.split().b_ops[k].matrix()), hb);
  }
  return 0.5 * sum;
}

}  // namespace qdb
