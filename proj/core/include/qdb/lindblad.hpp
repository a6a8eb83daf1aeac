#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qdb/matrix_kernel.hpp"

namespace qdb {

/// Cartesian parts of the Lindblad operators, L_k = A_k + i B_k.
struct CartesianSplit {
  std::vector<HermitianMatrix> a_ops;  ///< (L_k + L_k^dagger) / 2
  std::vector<HermitianMatrix> b_ops;  ///< (L_k - L_k^dagger) / (2i)
};

/// Identifies a piece of the Lindblad generator. NonUnitary = L1 + L2 + L3.
enum class Generator { Unitary, NonUnitary, L1, L2, L3, Total };

const char* to_string(Generator g);

/// Finite-dimensional Lindblad master equation
///   d rho / dt = (1/i hbar)[H, rho] + (1/2 hbar) sum_k (2 L rho L^+ - {L^+ L, rho}).
/// Immutable after construction; the Cartesian split is computed once.
class LindbladModel {
 public:
  LindbladModel(HermitianMatrix hamiltonian, std::vector<CMatrix> lindblads, double hbar = 1.0);

  Index dim() const { return hamiltonian_.dim(); }
  double hbar() const { return hbar_; }
  const HermitianMatrix& hamiltonian() const { return hamiltonian_; }
  const std::vector<CMatrix>& lindblads() const { return lindblads_; }
  std::size_t num_lindblads() const { return lindblads_.size(); }
  const CartesianSplit& split() const { return split_; }

  /// sum_k L_k^dagger L_k
  const CMatrix& decay_sum() const { return decay_sum_; }
  /// sum_k [L_k, L_k^dagger]
  const CMatrix& commutator_sum() const { return commutator_sum_; }

 private:
  HermitianMatrix hamiltonian_;
  std::vector<CMatrix> lindblads_;
  double hbar_;
  CartesianSplit split_;
  CMatrix decay_sum_;
  CMatrix commutator_sum_;
};

CMatrix apply_lu(const LindbladModel& m, const CMatrix& o);
CMatrix apply_lnu(const LindbladModel& m, const CMatrix& o);
/// -(1/2hbar) sum_k ([A_k,[A_k,o]] + [B_k,[B_k,o]])
CMatrix apply_l1(const LindbladModel& m, const CMatrix& o);
/// (1/4hbar) sum_k {[L_k, L_k^dagger], o}
CMatrix apply_l2(const LindbladModel& m, const CMatrix& o);
/// (1/2hbar) sum_k (L_k o L_k^dagger - L_k^dagger o L_k)
CMatrix apply_l3(const LindbladModel& m, const CMatrix& o);

CMatrix apply(Generator which, const LindbladModel& m, const CMatrix& o);
/// Hilbert-Schmidt adjoint (Heisenberg picture) of `which`, applied to o.
CMatrix adjoint_apply(Generator which, const LindbladModel& m, const CMatrix& o);

/// L_k -> L_k + alpha_k 1 together with the compensating Hamiltonian shift
/// H' = (1/2i) sum_k (conj(alpha_k) L_k - alpha_k L_k^dagger); the total
/// generator is unchanged.
LindbladModel gauge_transform(const LindbladModel& m, std::span<const Complex> alphas);
/// The Hamiltonian shift H' used by gauge_transform.
HermitianMatrix gauge_hamiltonian_shift(const LindbladModel& m, std::span<const Complex> alphas);

/// Matrix of `which` acting on column-stacked vec(rho); size d^2 x d^2.
CMatrix superoperator(const LindbladModel& m, Generator which = Generator::Total);

/// Operator 2-norm of the vectorized generator. Exact (SVD) for d <= 16,
/// a cheap upper bound above that.
double generator_norm(const LindbladModel& m);

struct SuperoperatorExp {};
struct Rk4 {
  double step = 0.0;
};
/// SuperoperatorExp for d <= 16, otherwise RK4 with a Richardson check.
struct AutoMethod {};
using EvolveMethod = std::variant<AutoMethod, SuperoperatorExp, Rk4>;

/// rho_t = e^{tL} rho0. Throws ValidationError for t < 0 and NumericalError
/// when an RK4 step drifts the trace by more than 1e-6.
DensityMatrix evolve(const LindbladModel& m, const DensityMatrix& rho0, double t,
                     EvolveMethod method = AutoMethod{});

/// Reusable propagator e^{tL} for a fixed model (d <= 16). Negative times
/// are allowed here; they are used for centred finite differences.
class Propagator {
 public:
  explicit Propagator(const LindbladModel& m);
  CMatrix apply(const CMatrix& rho, double t) const;

 private:
  Index dim_;
  CMatrix generator_;
};

struct FluctuationDissipation {
  double delta = 0.0;  ///< -Tr(rho L1[ln rho])
  double psi = 0.0;    ///< Tr(rho (L2 - L3)[ln rho])
};

/// Delta and Psi for a given logarithm of rho (no rank checks). The unitary
/// part never contributes.
FluctuationDissipation fluctuation_dissipation_terms(const LindbladModel& m, const CMatrix& rho,
                                                     const CMatrix& log_rho);

struct EntropyRateReport {
  double t = 0.0;
  double entropy = 0.0;
  double delta = 0.0;
  double psi = 0.0;
  double rate_fd = 0.0;
  double rate_tolerance = 0.0;
  std::optional<double> spohn_pi;
  std::optional<double> flux_phi_dot;
};

/// Minimum eigenvalue for the entropy-rate formulas.
inline constexpr double kFullRankThreshold = 1e-10;

/// 1e-4 / ||L||.
double default_fd_step(const LindbladModel& m);

/// dS/dt = Delta - Psi with a centred finite-difference cross-check of S
/// along the flow (steps h and h/2, Richardson-combined). Rejects states
/// with an eigenvalue <= 1e-10.
EntropyRateReport entropy_rate_report(const LindbladModel& m, const DensityMatrix& rho,
                                      double fd_step, double t = 0.0);

struct SpohnProduction {
  double pi = 0.0;         ///< -d/dt S[rho_t || rho_s]
  double phi_dot = 0.0;    ///< pi - (Delta - Psi)
  double stationarity_residual = 0.0;  ///< ||L[rho_s]||_F
};

SpohnProduction spohn_production(const LindbladModel& m, const DensityMatrix& rho,
                                 const DensityMatrix& rho_stationary, double fd_step);

/// Unique stationary state from the null space of the vectorized generator.
/// Throws DomainError when the null space is not one-dimensional.
DensityMatrix stationary_state(const LindbladModel& m);

}  // namespace qdb
