#include "qdb/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdb/errors.hpp"

namespace qdb {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr Index kSuperoperatorMaxDim = 16;

void check_operand(const LindbladModel& m, const CMatrix& o, const char* what) {
  require_square(o, m.dim(), what);
}

// Entropy of a Hermitian-ish matrix, tolerant of tiny negative eigenvalues
// produced by backward propagation.
double entropy_of(const CMatrix& rho) {
  const CMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return entropy_of_spectrum(es.eigenvalues());
}

CMatrix rk4_integrate(const LindbladModel& m, const CMatrix& rho0, double t, Index steps) {
  const auto rhs = [&m](const CMatrix& r) { return apply(Generator::Total, m, r); };
  const double h = t / static_cast<double>(steps);
  CMatrix r = rho0;
  for (Index s = 0; s < steps; ++s) {
    const CMatrix k1 = rhs(r);
    const CMatrix k2 = rhs(r + 0.5 * h * k1);
    const CMatrix k3 = rhs(r + 0.5 * h * k2);
    const CMatrix k4 = rhs(r + h * k3);
    r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double drift = std::abs(r.trace() - rho0.trace());
    if (!(drift <= 1e-6)) {
      std::ostringstream os;
      os << "evolve: RK4 step " << h << " too large, trace drifted by " << drift;
      throw NumericalError(os.str());
    }
  }
  return r;
}

Index steps_for(double t, double step) {
  if (!(step > 0.0)) throw ValidationError("evolve: RK4 step must be positive");
  return std::max<Index>(1, static_cast<Index>(std::ceil(t / step - 1e-12)));
}

CMatrix propagate(const LindbladModel& m, const CMatrix& rho0, double t, const EvolveMethod& method) {
  if (t == 0.0) return rho0;
  if (std::holds_alternative<Rk4>(method)) {
    const double step = std::get<Rk4>(method).step;
    return rk4_integrate(m, rho0, t, steps_for(std::abs(t), step));
  }
  const bool use_exp =
      std::holds_alternative<SuperoperatorExp>(method) || m.dim() <= kSuperoperatorMaxDim;
  if (use_exp) return Propagator(m).apply(rho0, t);

  // Large dimension: RK4 with step halving until two successive solutions agree.
  double step = 0.05 / generator_norm(m);
  CMatrix coarse = rk4_integrate(m, rho0, t, steps_for(std::abs(t), step));
  for (int attempt = 0; attempt < 12; ++attempt) {
    step *= 0.5;
    CMatrix fine = rk4_integrate(m, rho0, t, steps_for(std::abs(t), step));
    const double diff = (fine - coarse).norm();
    if (diff <= 1e-10) return fine + (fine - coarse) / 15.0;
    coarse = std::move(fine);
  }
  throw NumericalError("evolve: RK4 Richardson check did not converge");
}

}  // namespace

const char* to_string(Generator g) {
  switch (g) {
    case Generator::Unitary: return "L_U";
    case Generator::NonUnitary: return "L_NU";
    case Generator::L1: return "L1";
    case Generator::L2: return "L2";
    case Generator::L3: return "L3";
    case Generator::Total: return "L";
  }
  return "?";
}

LindbladModel::LindbladModel(HermitianMatrix hamiltonian, std::vector<CMatrix> lindblads,
                             double hbar)
    : hamiltonian_(std::move(hamiltonian)), lindblads_(std::move(lindblads)), hbar_(hbar) {
  if (!(hbar_ > 0.0)) throw ValidationError("LindbladModel: hbar must be positive");
  const Index d = hamiltonian_.dim();
  if (d == 0) throw ValidationError("LindbladModel: empty Hamiltonian");
  decay_sum_ = CMatrix::Zero(d, d);
  commutator_sum_ = CMatrix::Zero(d, d);
  for (std::size_t k = 0; k < lindblads_.size(); ++k) {
    const CMatrix& l = lindblads_[k];
    if (l.rows() != d || l.cols() != d) {
      std::ostringstream os;
      os << "LindbladModel: Lindblad operator " << k << " is " << l.rows() << "x" << l.cols()
         << ", expected " << d << "x" << d;
      throw ValidationError(os.str());
    }
    const CMatrix ld = l.adjoint();
    split_.a_ops.emplace_back(0.5 * (l + ld));
    split_.b_ops.emplace_back((l - ld) / (2.0 * kI));
    decay_sum_ += ld * l;
    commutator_sum_ += l * ld - ld * l;
  }
}

CMatrix apply_lu(const LindbladModel& m, const CMatrix& o) {
  check_operand(m, o, "apply_lu");
  return commutator(m.hamiltonian().matrix(), o) / (kI * m.hbar());
}

CMatrix apply_lnu(const LindbladModel& m, const CMatrix& o) {
  check_operand(m, o, "apply_lnu");
  CMatrix out = -(m.decay_sum() * o + o * m.decay_sum());
  for (const CMatrix& l : m.lindblads()) out += 2.0 * l * o * l.adjoint();
  return out / (2.0 * m.hbar());
}

CMatrix apply_l1(const LindbladModel& m, const CMatrix& o) {
  check_operand(m, o, "apply_l1");
  CMatrix out = CMatrix::Zero(o.rows(), o.cols());
  const auto& s = m.split();
  for (std::size_t k = 0; k < s.a_ops.size(); ++k) {
    const CMatrix& a = s.a_ops[k].matrix();
    const CMatrix& b = s.b_ops[k].matrix();
    out += commutator(a, commutator(a, o)) + commutator(b, commutator(b, o));
  }
  return -out / (2.0 * m.hbar());
}

CMatrix apply_l2(const LindbladModel& m, const CMatrix& o) {
  check_operand(m, o, "apply_l2");
  return anticommutator(m.commutator_sum(), o) / (4.0 * m.hbar());
}

CMatrix apply_l3(const LindbladModel& m, const CMatrix& o) {
  check_operand(m, o, "apply_l3");
  CMatrix out = CMatrix::Zero(o.rows(), o.cols());
  for (const CMatrix& l : m.lindblads()) out += l * o * l.adjoint() - l.adjoint() * o * l;
  return out / (2.0 * m.hbar());
}

CMatrix apply(Generator which, const LindbladModel& m, const CMatrix& o) {
  switch (which) {
    case Generator::Unitary: return apply_lu(m, o);
    case Generator::NonUnitary: return apply_lnu(m, o);
    case Generator::L1: return apply_l1(m, o);
    case Generator::L2: return apply_l2(m, o);
    case Generator::L3: return apply_l3(m, o);
    case Generator::Total: return apply_lu(m, o) + apply_lnu(m, o);
  }
  throw ValidationError("apply: unknown generator");
}

CMatrix adjoint_apply(Generator which, const LindbladModel& m, const CMatrix& o) {
  switch (which) {
    case Generator::Unitary: return -apply_lu(m, o);
    case Generator::NonUnitary: {
      check_operand(m, o, "adjoint_apply");
      CMatrix out = -(m.decay_sum() * o + o * m.decay_sum());
      for (const CMatrix& l : m.lindblads()) out += 2.0 * l.adjoint() * o * l;
      return out / (2.0 * m.hbar());
    }
    case Generator::L1: return apply_l1(m, o);
    case Generator::L2: return apply_l2(m, o);
    case Generator::L3: return -apply_l3(m, o);
    case Generator::Total:
      return adjoint_apply(Generator::Unitary, m, o) + adjoint_apply(Generator::NonUnitary, m, o);
  }
  throw ValidationError("adjoint_apply: unknown generator");
}

HermitianMatrix gauge_hamiltonian_shift(const LindbladModel& m, std::span<const Complex> alphas) {
  if (alphas.size() != m.num_lindblads()) {
    std::ostringstream os;
    os << "gauge_transform: expected " << m.num_lindblads() << " shifts, got " << alphas.size();
    throw ValidationError(os.str());
  }
  const Index d = m.dim();
  CMatrix shift = CMatrix::Zero(d, d);
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const CMatrix& l = m.lindblads()[k];
    shift += std::conj(alphas[k]) * l - alphas[k] * l.adjoint();
  }
  return HermitianMatrix(shift / (2.0 * kI), 1e-10);
}

LindbladModel gauge_transform(const LindbladModel& m, std::span<const Complex> alphas) {
  const HermitianMatrix shift = gauge_hamiltonian_shift(m, alphas);
  const Index d = m.dim();
  std::vector<CMatrix> shifted;
  shifted.reserve(alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    shifted.push_back(m.lindblads()[k] + alphas[k] * CMatrix::Identity(d, d));
  }
  return LindbladModel(HermitianMatrix(m.hamiltonian().matrix() + shift.matrix()),
                       std::move(shifted), m.hbar());
}

CMatrix superoperator(const LindbladModel& m, Generator which) {
  const Index d = m.dim();
  const CMatrix eye = CMatrix::Identity(d, d);
  const double hb = m.hbar();
  const auto lu = [&] {
    const CMatrix& h = m.hamiltonian().matrix();
    return CMatrix((kron(eye, h) - kron(h.transpose(), eye)) / (kI * hb));
  };
  const auto lnu = [&] {
    const CMatrix& g = m.decay_sum();
    CMatrix s = -(kron(eye, g) + kron(g.transpose(), eye));
    for (const CMatrix& l : m.lindblads()) s += 2.0 * kron(l.conjugate(), l);
    return CMatrix(s / (2.0 * hb));
  };
  switch (which) {
    case Generator::Unitary: return lu();
    case Generator::NonUnitary: return lnu();
    case Generator::Total: return lu() + lnu();
    case Generator::L1: {
      CMatrix s = CMatrix::Zero(d * d, d * d);
      const auto ad = [&](const CMatrix& a) { return CMatrix(kron(eye, a) - kron(a.transpose(), eye)); };
      for (std::size_t k = 0; k < m.num_lindblads(); ++k) {
        const CMatrix a = ad(m.split().a_ops[k].matrix());
        const CMatrix b = ad(m.split().b_ops[k].matrix());
        s += a * a + b * b;
      }
      return -s / (2.0 * hb);
    }
    case Generator::L2: {
      const CMatrix& c = m.commutator_sum();
      return (kron(eye, c) + kron(c.transpose(), eye)) / (4.0 * hb);
    }
    case Generator::L3: {
      CMatrix s = CMatrix::Zero(d * d, d * d);
      for (const CMatrix& l : m.lindblads()) {
        s += kron(l.conjugate(), l) - kron(l.transpose(), CMatrix(l.adjoint()));
      }
      return s / (2.0 * hb);
    }
  }
  throw ValidationError("superoperator: unknown generator");
}

double generator_norm(const LindbladModel& m) {
  if (m.dim() <= kSuperoperatorMaxDim) {
    Eigen::JacobiSVD<CMatrix> svd(superoperator(m));
    return std::max(svd.singularValues()(0), 1e-300);
  }
  // ||[H, .]|| <= 2||H||, ||L . L^+|| <= ||L||^2, ||{G, .}|| <= 2||G||
  const auto op2 = [](const CMatrix& a) {
    return Eigen::JacobiSVD<CMatrix>(a).singularValues()(0);
  };
  double bound = 2.0 * op2(m.hamiltonian().matrix()) / m.hbar();
  double dissipative = 2.0 * op2(m.decay_sum());
  for (const CMatrix& l : m.lindblads()) dissipative += 2.0 * std::pow(op2(l), 2);
  bound += dissipative / (2.0 * m.hbar());
  return std::max(bound, 1e-300);
}

Propagator::Propagator(const LindbladModel& m) : dim_(m.dim()), generator_(superoperator(m)) {
  if (dim_ > 64) throw ValidationError("Propagator: dimension too large for the superoperator route");
}

CMatrix Propagator::apply(const CMatrix& rho, double t) const {
  require_square(rho, dim_, "Propagator::apply");
  if (t == 0.0) return rho;
  const CMatrix u = matrix_exp(CMatrix(t * generator_));
  return unvec(u * vec(rho), dim_);
}

DensityMatrix evolve(const LindbladModel& m, const DensityMatrix& rho0, double t,
                     EvolveMethod method) {
  if (!(t >= 0.0)) throw ValidationError("evolve: time must be non-negative");
  require_square(rho0.matrix(), m.dim(), "evolve");
  if (t == 0.0) return rho0;
  const CMatrix r = propagate(m, rho0.matrix(), t, method);
  const double herm = hermiticity_error(r);
  if (herm > 1e-10) {
    std::ostringstream os;
    os << "evolve: result lost Hermiticity (" << herm << ")";
    throw NumericalError(os.str());
  }
  return DensityMatrix(r, DensityTolerance{1e-10, 1e-8, 1e-9});
}

FluctuationDissipation fluctuation_dissipation_terms(const LindbladModel& m, const CMatrix& rho,
                                                     const CMatrix& log_rho) {
  check_operand(m, rho, "fluctuation_dissipation_terms");
  check_operand(m, log_rho, "fluctuation_dissipation_terms");
  const auto tr_rho = [&rho](const CMatrix& x) { return (rho.cwiseProduct(x.transpose())).sum(); };
  FluctuationDissipation out;
  out.delta = -tr_rho(apply_l1(m, log_rho)).real();
  out.psi = tr_rho(apply_l2(m, log_rho) - apply_l3(m, log_rho)).real();
  return out;
}

double default_fd_step(const LindbladModel& m) { return 1e-4 / generator_norm(m); }

namespace {

void require_full_rank(const DensityMatrix& rho, const char* what) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > kFullRankThreshold)) {
    std::ostringstream os;
    os << what << ": state is singular (min eigenvalue " << lmin
       << "); mix it with epsilon*I before computing entropy rates";
    throw DomainError(os.str());
  }
}

}  // namespace

namespace {

// Centred difference at h and h/2 combined to cancel the h^2 term.
template <class F>
double richardson_centred(const F& f, double h) {
  const double coarse = (f(h) - f(-h)) / (2.0 * h);
  const double fine = (f(0.5 * h) - f(-0.5 * h)) / h;
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace

EntropyRateReport entropy_rate_report(const LindbladModel& m, const DensityMatrix& rho,
                                      double fd_step, double t) {
  if (!(fd_step > 0.0)) throw ValidationError("entropy_rate_report: fd_step must be positive");
  require_square(rho.matrix(), m.dim(), "entropy_rate_report");
  require_full_rank(rho, "entropy_rate_report");

  const HermitianMatrix log_rho = matrix_log_psd(rho);
  const FluctuationDissipation fd = fluctuation_dissipation_terms(m, rho.matrix(), log_rho.matrix());

  const EvolveMethod method = AutoMethod{};
  const double rate_fd = richardson_centred(
      [&](double h) { return entropy_of(propagate(m, rho.matrix(), h, method)); }, fd_step);

  const double norm = generator_norm(m);
  EntropyRateReport r;
  r.t = t;
  r.entropy = von_neumann_entropy(rho);
  r.delta = fd.delta;
  r.psi = fd.psi;
  r.rate_fd = rate_fd;
  r.rate_tolerance = std::max(1e-6, 10.0 * fd_step * fd_step * norm * norm * norm);
  return r;
}

SpohnProduction spohn_production(const LindbladModel& m, const DensityMatrix& rho,
                                 const DensityMatrix& rho_stationary, double fd_step) {
  if (!(fd_step > 0.0)) throw ValidationError("spohn_production: fd_step must be positive");
  require_square(rho.matrix(), m.dim(), "spohn_production");
  require_square(rho_stationary.matrix(), m.dim(), "spohn_production");
  require_full_rank(rho, "spohn_production");
  require_full_rank(rho_stationary, "spohn_production");

  SpohnProduction out;
  out.stationarity_residual = apply(Generator::Total, m, rho_stationary.matrix()).norm();
  if (out.stationarity_residual > 1e-8) {
    std::ostringstream os;
    os << "spohn_production: reference state is not stationary, ||L[rho_s]|| = "
       << out.stationarity_residual;
    throw DomainError(os.str());
  }

  const CMatrix log_s = matrix_log_psd(rho_stationary).matrix();
  const auto rel = [&](const CMatrix& r) {
    const CMatrix h = 0.5 * (r + r.adjoint());
    return -entropy_of(h) - (h.cwiseProduct(log_s.transpose())).sum().real();
  };
  const EvolveMethod method = AutoMethod{};
  out.pi = -richardson_centred([&](double h) { return rel(propagate(m, rho.matrix(), h, method)); },
                                fd_step);

  const HermitianMatrix log_rho = matrix_log_psd(rho);
  const FluctuationDissipation fd = fluctuation_dissipation_terms(m, rho.matrix(), log_rho.matrix());
  out.phi_dot = out.pi - (fd.delta - fd.psi);
  return out;
}

DensityMatrix stationary_state(const LindbladModel& m) {
  if (m.dim() > 32) throw ValidationError("stationary_state: dimension above 32 not supported");
  const CMatrix s = superoperator(m);
  Eigen::JacobiSVD<CMatrix> svd(s, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();  // descending
  const Index n = sv.size();
  const double scale = std::max(sv(0), 1e-300);
  if (n >= 2 && sv(n - 2) <= 1e-8 * scale) {
    std::ostringstream os;
    os << "stationary_state: null space of the generator has dimension > 1 (singular values "
       << sv(n - 2) << ", " << sv(n - 1) << "); the stationary state is not unique";
    throw DomainError(os.str());
  }
  CMatrix rho = unvec(svd.matrixV().col(n - 1), m.dim());
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-12) throw NumericalError("stationary_state: null vector has zero trace");
  rho /= tr;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(rho, DensityTolerance{1e-10, 1e-8, 1e-9});
}

}  // namespace qdb
