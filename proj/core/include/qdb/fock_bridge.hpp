#pragma once

// Truncated Fock-space images of Gaussian models and states. Mode 0 is the
// most significant factor of the tensor product; each mode keeps levels
// 0..cutoff-1.

#include <cstdint>
#include <string>
#include <vector>

#include "qdb/gaussian.hpp"
#include "qdb/lindblad.hpp"

namespace qdb {

struct FockTruncation {
  Index n_modes = 1;
  Index cutoff = 40;
  double hbar = 1.0;
  Index max_dim = 4096;

  /// cutoff^n_modes; throws ValidationError above max_dim.
  Index dim() const;
};

/// Truncated annihilation operator of one mode.
CMatrix annihilation_operator(const FockTruncation& tr, Index mode);

/// x = (q_1..q_n, p_1..p_n) with q = sqrt(hbar/2)(a + a^+), p = i sqrt(hbar/2)(a^+ - a).
std::vector<HermitianMatrix> quadrature_operators(const FockTruncation& tr);

/// Largest |[x_j, x_k] - i hbar J_jk| over the sub-block whose levels all lie
/// below cutoff - 2. Needs cutoff >= 3.
double ccr_subblock_error(const FockTruncation& tr);

/// Basis indices whose every mode level is below `levels`.
std::vector<Index> subblock_indices(const FockTruncation& tr, Index levels);

/// H = (1/2) x^T B x + x^T J xi and L_k = l_k^T J x, truncated. Quadratic
/// operators are formed one level higher and cut back, so their matrix
/// elements inside the truncation are exact.
LindbladModel lift_model(const GdsModel& g, const FockTruncation& tr);

struct LiftedState {
  DensityMatrix rho;
  /// -(x - mu)^T U (x - mu) / (2 hbar) - ln z_truncated, exact on the
  /// truncated space (no eigenvalue floor).
  CMatrix log_rho;
  double z_truncated = 0.0;  ///< trace before renormalisation
  double z_gaussian = 0.0;   ///< sqrt det(V + (i/2) J)
  double tail_mass = 0.0;    ///< 1 - z_truncated / z_gaussian
};

inline constexpr double kDefaultTailTolerance = 1e-8;

/// exp(-(x - mu)^T U (x - mu) / (2 hbar)) renormalised to unit trace.
/// Throws DomainError naming a sufficient cutoff when the tail mass exceeds
/// `tail_tolerance`; pass a negative tolerance to skip the check.
LiftedState lift_state(const GaussianState& s, const FockTruncation& tr,
                       double tail_tolerance = kDefaultTailTolerance);

/// Mean and dimensionless symmetrised covariance of a truncated state.
GaussianState extract_moments(const DensityMatrix& rho, const FockTruncation& tr);

/// Hhat[O]_jk = -(1/hbar^2)[(Jx)_j, [(Jx)_k, O]] for all j, k (row-major).
std::vector<CMatrix> hhat(const FockTruncation& tr, const CMatrix& o);
/// Mhat[O]_jk = (i/hbar) x_j [(Jx)_k, O] for all j, k (row-major).
std::vector<CMatrix> mhat(const FockTruncation& tr, const CMatrix& o);

struct IdentityCheck {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return error <= tolerance; }
};

struct CrossValidationOptions {
  double tail_tolerance = kDefaultTailTolerance;
  std::uint64_t seed = 1;
  int n_observables = 3;
  double rate_tolerance = 1e-5;
};

struct CrossValidationReport {
  double delta_lindblad = 0.0;
  double psi_lindblad = 0.0;
  double delta_gaussian = 0.0;
  double psi_gaussian = 0.0;
  double tail_mass = 0.0;
  double eps_trunc = 0.0;
  double tolerance = 0.0;
  RMatrix dqfi_lindblad;
  RMatrix dqfi_gaussian;
  CMatrix m_lindblad;
  CMatrix m_gaussian;
  std::vector<IdentityCheck> checks;

  bool passed() const;
  /// max(|delta_lindblad - delta_gaussian|, |psi_lindblad - psi_gaussian|)
  double rate_discrepancy() const;
  /// Human-readable summary of every failing check; empty when all pass.
  std::string diagnostics() const;
};

/// (Delta, Psi), the DQFI matrix and M computed on the lifted model and state
/// and analytically, plus the phase-space forms of L1, L2, L3 and of the
/// full generator on random observables supported below cutoff - 3.
CrossValidationReport cross_validate_rates(const GdsModel& g, const GaussianState& s,
                                           const FockTruncation& tr,
                                           const CrossValidationOptions& options = {});

}  // namespace qdb
