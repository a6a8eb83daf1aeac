#pragma once

// Gaussian dynamical semigroups in phase space. Conventions: x = (q_1..q_n,
// p_1..p_n), J = [[0, 1], [-1, 0]], covariance V dimensionless with vacuum
// V = 1/2 (the physical covariance is hbar V).

#include <vector>

#include "qdb/matrix_kernel.hpp"

namespace qdb {

/// The 2n x 2n symplectic form.
RMatrix symplectic_form(Index n_modes);

/// Sigma_k = sqrt(hbar) Re l_k and SigmaBar_k = sqrt(hbar) Im l_k.
struct LangevinSet {
  std::vector<RVector> sigma;
  std::vector<RVector> sigma_bar;
};

/// Quadratic Hamiltonian H = (1/2) x^T B x + x^T J xi and linear Lindblad
/// operators L_k = l_k^T J x.
class GdsModel {
 public:
  GdsModel(Index n_modes, double hbar, RMatrix b_matrix, RVector xi,
           std::vector<CVector> lindblad_vectors);

  Index n_modes() const { return n_; }
  Index phase_dim() const { return 2 * n_; }
  double hbar() const { return hbar_; }
  const RMatrix& b_matrix() const { return b_; }
  const RVector& xi() const { return xi_; }
  const std::vector<CVector>& lindblad_vectors() const { return l_; }

  /// Gamma = sum_k l_k l_k^dagger
  const CMatrix& gamma() const { return gamma_; }
  /// D = hbar Re Gamma
  const RMatrix& diffusion() const { return d_; }
  /// C = Im Gamma
  const RMatrix& dissipation() const { return c_; }
  /// A = J B - C J
  const RMatrix& drift() const { return a_; }
  const RMatrix& symplectic() const { return j_; }

  Index rank_diffusion() const { return rank_d_; }
  Index rank_dissipation() const { return rank_c_; }
  /// Smallest eigenvalue of D - i hbar C.
  double fluctuation_dissipation_margin() const { return fd_margin_; }

  LangevinSet langevin() const;

 private:
  Index n_;
  double hbar_;
  RMatrix b_;
  RVector xi_;
  std::vector<CVector> l_;
  RMatrix j_;
  CMatrix gamma_;
  RMatrix d_;
  RMatrix c_;
  RMatrix a_;
  Index rank_d_ = 0;
  Index rank_c_ = 0;
  double fd_margin_ = 0.0;
};

/// Same as the GdsModel constructor, named after the operation it performs.
GdsModel build_model(Index n_modes, double hbar, const RMatrix& b_matrix, const RVector& xi,
                     const std::vector<CVector>& lindblad_vectors);

/// Lindblad vectors of the single-mode optical master equation, D = gamma 1
/// and C = -alpha J (so JC = alpha 1). Needs gamma / hbar >= alpha > 0.
std::vector<CVector> optical_lindblad_vectors(double hbar, double gamma, double alpha);

class GaussianState {
 public:
  GaussianState(RVector mean, RMatrix covariance);

  static GaussianState vacuum(Index n_modes);
  /// V = nu 1, zero mean.
  static GaussianState thermal(Index n_modes, double nu);

  Index n_modes() const { return mean_.size() / 2; }
  const RVector& mean() const { return mean_; }
  const RMatrix& covariance() const { return v_; }

 private:
  RVector mean_;
  RMatrix v_;
};

/// dV/dt = D/hbar + A V + V A^T, dmu/dt = A mu - xi, for V and mu.
RMatrix covariance_derivative(const GdsModel& m, const RMatrix& v);
RVector mean_derivative(const GdsModel& m, const RVector& mean);

GaussianState evolve_moments(const GdsModel& m, const GaussianState& s0, double t);

/// Ascending nu_j, the positive eigenvalues of iJV.
RVector symplectic_eigenvalues(const GaussianState& s);

/// States with nu_min <= 1/2 + kNearPureMargin are outside the domain of the
/// U-dependent formulas.
inline constexpr double kNearPureMargin = 1e-7;

/// U = 2iJ arccoth(2iVJ).
RMatrix u_matrix(const GaussianState& s);
/// Theta = U - V^{-1}.
RMatrix theta_matrix(const GaussianState& s);
/// Partial sum of Theta = sum_{m=1}^{terms} (2iJ/(2m+1)) (iJV^{-1}/2)^{2m+1}.
RMatrix theta_series(const GaussianState& s, int terms);

double vn_entropy_gaussian(const GaussianState& s);
/// h = (1/2) ln det V + n ln(2 pi e)
double shannon_entropy_wigner(const GaussianState& s);

struct GaussianRates {
  double rate = 0.0;
  double delta = 0.0;  ///< (1/2) tr(D U) / hbar
  double psi = 0.0;    ///< tr(J C U V)
};

GaussianRates quantum_debruijn_rate(const GdsModel& m, const GaussianState& s);

/// U / hbar.
RMatrix dqfi_matrix_gaussian(const GaussianState& s, double hbar);
/// V U + (i/2) J U; tr(C J M) equals the psi of quantum_debruijn_rate.
CMatrix m_matrix_gaussian(const GaussianState& s);

/// Lyapunov solution D/hbar + A V + V A^T = 0 with mean A^{-1} xi. Throws
/// DomainError when A is not asymptotically stable.
GaussianState stationary_covariance(const GdsModel& m);

/// (1/2) tr(Theta dV/dt).
double entropy_rate_gap(const GdsModel& m, const GaussianState& s);
/// (1/2) tr(D V^{-1}) / hbar - tr(J C).
double shannon_debruijn_rate(const GdsModel& m, const GaussianState& s);
/// O^T V^{-1} O / hbar for every Langevin vector, sigma terms first.
std::vector<double> wigner_fisher_terms(const GdsModel& m, const GaussianState& s);

}  // namespace qdb
