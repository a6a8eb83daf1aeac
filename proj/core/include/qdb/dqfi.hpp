#pragma once

#include "qdb/lindblad.hpp"
#include "qdb/matrix_kernel.hpp"

namespace qdb {

/// rho_{dtheta} = U rho U^dagger with U = exp(-i dtheta C / hbar).
struct UnitaryOrbitFamily {
  DensityMatrix base_state;
  HermitianMatrix generator;
  double hbar = 1.0;

  DensityMatrix at(double dtheta) const;
};

/// Eigenvalues of sigma at or below this are treated as outside its support.
inline constexpr double kSupportFloor = 1e-12;

/// S[rho || sigma] = Tr(rho (ln rho - ln sigma)). Throws DivergenceError when
/// rho has weight above `support_floor` outside the support of sigma.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                        double support_floor = kSupportFloor);

/// (1/hbar^2) Tr(rho [C, [C, ln rho]]): the DQFI of the unitary orbit
/// generated by C. Requires a full-rank rho.
double dqfi_commutator(const DensityMatrix& rho, const HermitianMatrix& c, double hbar = 1.0);

struct DqfiEstimate {
  double value = 0.0;      ///< Richardson extrapolation of the two differences
  double coarse = 0.0;     ///< second difference at h
  double fine = 0.0;       ///< second difference at h/2
  double curvature = 0.0;  ///< C4 estimate, |coarse - fine| / (3h^2/4)
  double tolerance = 0.0;  ///< max(1e-5, C4 h^2)
};

/// Second central difference of dtheta -> S[rho_{dtheta} || rho] at 0, with
/// one step halving. Throws NumericalError when the halving changes the
/// result by more than 10 h^2 max(1, |J|) max(1, ||C/hbar||^2), which only
/// happens once roundoff dominates.
DqfiEstimate dqfi_finite_difference_estimate(const UnitaryOrbitFamily& f, double h = 1e-3);
double dqfi_finite_difference(const UnitaryOrbitFamily& f, double h = 1e-3);

/// (1/2) sum_k (J_q[rho; sqrt(hbar) A_k] + J_q[rho; sqrt(hbar) B_k]).
double delta_from_dqfi(const LindbladModel& m, const DensityMatrix& rho);

}  // namespace qdb
