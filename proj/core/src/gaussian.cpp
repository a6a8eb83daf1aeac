#include "qdb/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "moment_ode.hpp"
#include "qdb/errors.hpp"

namespace qdb {

namespace {

constexpr Complex kI{0.0, 1.0};

double max_abs(const RMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_symmetric(const RMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
  const double asym = max_abs(m - m.transpose());
  if (asym > 1e-12 * std::max(1.0, max_abs(m))) {
    std::ostringstream os;
    os << what << ": matrix is not symmetric (max |m - m^T| = " << asym << ")";
    throw ValidationError(os.str());
  }
}

double min_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Minimum eigenvalue of V + (i/2) J.
double bona_fide_margin(const RMatrix& v) {
  const RMatrix j = symplectic_form(v.rows() / 2);
  return min_eigenvalue(v.cast<Complex>() + 0.5 * kI * j.cast<Complex>());
}

struct SymplecticSpectrum {
  RMatrix sqrt_v;
  RMatrix inv_sqrt_v;
  EigenDecomposition h;  // of i V^{1/2} J V^{1/2}; eigenvalues -nu_n..-nu_1, nu_1..nu_n
};

SymplecticSpectrum symplectic_spectrum(const GaussianState& s) {
  const RMatrix& v = s.covariance();
  const Index n = s.n_modes();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(v);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw DomainError("symplectic_eigenvalues: covariance is not positive definite");
  }
  SymplecticSpectrum out;
  const RVector root = es.eigenvalues().cwiseSqrt();
  out.sqrt_v = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  out.inv_sqrt_v = es.eigenvectors() * root.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  const RMatrix j = symplectic_form(n);
  const CMatrix h = kI * (out.sqrt_v * j * out.sqrt_v).cast<Complex>();
  out.h = herm_eig(HermitianMatrix(0.5 * (h + h.adjoint())));
  const RVector& lam = out.h.values;
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (Index k = 0; k < n; ++k) {
    const double residue = std::abs(lam(k) + lam(2 * n - 1 - k));
    if (residue > 1e-9 * scale) {
      std::ostringstream os;
      os << "symplectic_eigenvalues: eigenvalues of iJV do not pair as +-nu (residue " << residue
         << ")";
      throw NumericalError(os.str());
    }
  }
  return out;
}

double nu_min(const SymplecticSpectrum& sp) { return sp.h.values(sp.h.values.size() / 2); }

void require_strictly_mixed(const SymplecticSpectrum& sp, const char* what) {
  const double nu = nu_min(sp);
  if (!(nu > 0.5 + kNearPureMargin)) {
    std::ostringstream os;
    os << what << ": state is (nearly) pure, nu_min = " << nu
       << "; U = 2iJ arccoth(2iVJ) diverges as nu -> 1/2";
    throw DivergenceError(os.str());
  }
}

RMatrix real_part_checked(const CMatrix& m, const char* what) {
  const double imag = m.imag().cwiseAbs().maxCoeff();
  if (imag > 1e-9 * std::max(1.0, m.real().cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << what << ": result has an imaginary residue " << imag;
    throw NumericalError(os.str());
  }
  return m.real();
}

void require_matching(const GdsModel& m, const GaussianState& s, const char* what) {
  if (s.n_modes() != m.n_modes()) {
    std::ostringstream os;
    os << what << ": state has " << s.n_modes() << " modes, model has " << m.n_modes();
    throw ValidationError(os.str());
  }
}

RMatrix inverse_spd(const RMatrix& v, const char* what) {
  Eigen::LLT<RMatrix> llt(v);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << what << ": covariance is singular or not positive definite";
    throw DomainError(os.str());
  }
  return llt.solve(RMatrix::Identity(v.rows(), v.cols()));
}

}  // namespace

RMatrix symplectic_form(Index n_modes) {
  if (n_modes < 1) throw ValidationError("symplectic_form: need at least one mode");
  RMatrix j = RMatrix::Zero(2 * n_modes, 2 * n_modes);
  j.topRightCorner(n_modes, n_modes) = RMatrix::Identity(n_modes, n_modes);
  j.bottomLeftCorner(n_modes, n_modes) = -RMatrix::Identity(n_modes, n_modes);
  return j;
}

// ---------------------------------------------------------------------------
// GdsModel

GdsModel::GdsModel(Index n_modes, double hbar, RMatrix b_matrix, RVector xi,
                   std::vector<CVector> lindblad_vectors)
    : n_(n_modes), hbar_(hbar), b_(std::move(b_matrix)), xi_(std::move(xi)),
      l_(std::move(lindblad_vectors)) {
  if (n_ < 1) throw ValidationError("GdsModel: n_modes must be at least 1");
  if (!(hbar_ > 0.0)) throw ValidationError("GdsModel: hbar must be positive");
  const Index dim = 2 * n_;
  if (b_.rows() != dim || b_.cols() != dim) {
    std::ostringstream os;
    os << "GdsModel: b_matrix is " << b_.rows() << "x" << b_.cols() << ", expected " << dim << "x"
       << dim;
    throw ValidationError(os.str());
  }
  require_symmetric(b_, "GdsModel: b_matrix");
  b_ = 0.5 * (b_ + b_.transpose()).eval();
  {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(b_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, max_abs(b_))) {
      std::ostringstream os;
      os << "GdsModel: b_matrix is not positive semidefinite (min eigenvalue "
         << es.eigenvalues().minCoeff() << ")";
      throw ValidationError(os.str());
    }
  }
  if (xi_.size() != dim) {
    std::ostringstream os;
    os << "GdsModel: xi has length " << xi_.size() << ", expected " << dim;
    throw ValidationError(os.str());
  }
  j_ = symplectic_form(n_);
  gamma_ = CMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < l_.size(); ++k) {
    if (l_[k].size() != dim) {
      std::ostringstream os;
      os << "GdsModel: lindblad vector " << k << " has length " << l_[k].size() << ", expected "
         << dim;
      throw ValidationError(os.str());
    }
    gamma_ += l_[k] * l_[k].adjoint();
  }
  gamma_ = 0.5 * (gamma_ + gamma_.adjoint()).eval();
  d_ = hbar_ * gamma_.real();
  c_ = gamma_.imag();
  a_ = j_ * b_ - c_ * j_;

  fd_margin_ = min_eigenvalue(d_.cast<Complex>() - kI * hbar_ * c_.cast<Complex>());
  if (fd_margin_ < -1e-8) {
    std::ostringstream os;
    os << "GdsModel: fluctuation-dissipation inequality D - i hbar C >= 0 violated (min eigenvalue "
       << fd_margin_ << ")";
    throw DomainError(os.str());
  }
  const double d_scale = std::max(1e-300, max_abs(d_));
  Eigen::SelfAdjointEigenSolver<RMatrix> dsolve(d_, Eigen::EigenvaluesOnly);
  rank_d_ = (dsolve.eigenvalues().array() > 1e-12 * d_scale).count();
  Eigen::JacobiSVD<RMatrix> csvd(c_);
  const double c_scale = std::max(1e-300, csvd.singularValues().size() ? csvd.singularValues()(0) : 0.0);
  rank_c_ = (csvd.singularValues().array() > 1e-12 * c_scale).count();
}

LangevinSet GdsModel::langevin() const {
  LangevinSet out;
  const double root = std::sqrt(hbar_);
  for (const CVector& l : l_) {
    out.sigma.emplace_back(root * l.real());
    out.sigma_bar.emplace_back(root * l.imag());
  }
  return out;
}

GdsModel build_model(Index n_modes, double hbar, const RMatrix& b_matrix, const RVector& xi,
                     const std::vector<CVector>& lindblad_vectors) {
  return GdsModel(n_modes, hbar, b_matrix, xi, lindblad_vectors);
}

std::vector<CVector> optical_lindblad_vectors(double hbar, double gamma, double alpha) {
  if (!(hbar > 0.0) || !(alpha > 0.0)) {
    throw ValidationError("optical_lindblad_vectors: hbar and alpha must be positive");
  }
  const double excess = gamma / hbar - alpha;
  if (excess < -1e-12 * std::max(1.0, alpha)) {
    std::ostringstream os;
    os << "optical_lindblad_vectors: gamma / hbar = " << gamma / hbar << " is below alpha = " << alpha
       << "; the model would violate D - i hbar C >= 0";
    throw DomainError(os.str());
  }
  const double r = std::sqrt(alpha);
  std::vector<CVector> out;
  out.push_back((CVector(2) << Complex(r, 0.0), Complex(0.0, r)).finished());
  if (excess > 0.0) {
    const double e = std::sqrt(excess);
    out.push_back((CVector(2) << Complex(e, 0.0), Complex(0.0, 0.0)).finished());
    out.push_back((CVector(2) << Complex(0.0, 0.0), Complex(e, 0.0)).finished());
  }
  return out;
}

// ---------------------------------------------------------------------------
// GaussianState

GaussianState::GaussianState(RVector mean, RMatrix covariance)
    : mean_(std::move(mean)), v_(std::move(covariance)) {
  if (v_.rows() == 0 || v_.rows() % 2 != 0) {
    throw ValidationError("GaussianState: covariance must be 2n x 2n with n >= 1");
  }
  require_symmetric(v_, "GaussianState: covariance");
  if (mean_.size() != v_.rows()) {
    std::ostringstream os;
    os << "GaussianState: mean has length " << mean_.size() << ", covariance is " << v_.rows()
       << "x" << v_.cols();
    throw ValidationError(os.str());
  }
  v_ = 0.5 * (v_ + v_.transpose()).eval();
  const double margin = bona_fide_margin(v_);
  if (margin < -1e-10 * std::max(1.0, max_abs(v_))) {
    std::ostringstream os;
    os << "GaussianState: V + (i/2)J is not positive semidefinite (min eigenvalue " << margin
       << "); not a quantum covariance";
    throw DomainError(os.str());
  }
}

GaussianState GaussianState::vacuum(Index n_modes) { return thermal(n_modes, 0.5); }

GaussianState GaussianState::thermal(Index n_modes, double nu) {
  if (n_modes < 1) throw ValidationError("GaussianState::thermal: need at least one mode");
  return GaussianState(RVector::Zero(2 * n_modes), nu * RMatrix::Identity(2 * n_modes, 2 * n_modes));
}

// ---------------------------------------------------------------------------
// Dynamics

RMatrix covariance_derivative(const GdsModel& m, const RMatrix& v) {
  if (v.rows() != m.phase_dim() || v.cols() != m.phase_dim()) {
    throw ValidationError("covariance_derivative: covariance has the wrong shape");
  }
  return m.diffusion() / m.hbar() + m.drift() * v + v * m.drift().transpose();
}

RVector mean_derivative(const GdsModel& m, const RVector& mean) {
  if (mean.size() != m.phase_dim()) throw ValidationError("mean_derivative: wrong length");
  return m.drift() * mean - m.xi();
}

GaussianState evolve_moments(const GdsModel& m, const GaussianState& s0, double t) {
  require_matching(m, s0, "evolve_moments");
  if (!(t >= 0.0)) throw ValidationError("evolve_moments: time must be non-negative");
  if (t == 0.0) return s0;
  const detail::Moments out = detail::integrate_moments(
      m.drift(), m.diffusion() / m.hbar(), m.xi(), {s0.mean(), s0.covariance()}, t);
  const double margin = bona_fide_margin(out.covariance);
  if (margin < -1e-8) {
    std::ostringstream os;
    os << "evolve_moments: integrated covariance left the quantum domain (margin " << margin << ")";
    throw NumericalError(os.str());
  }
  // Re-admit a state whose margin is a roundoff-level negative number.
  RMatrix v = out.covariance;
  if (margin < 0.0) v += (-margin) * RMatrix::Identity(v.rows(), v.cols());
  return GaussianState(out.mean, v);
}

RVector symplectic_eigenvalues(const GaussianState& s) {
  const SymplecticSpectrum sp = symplectic_spectrum(s);
  const Index n = s.n_modes();
  return sp.h.values.tail(n);
}

RMatrix u_matrix(const GaussianState& s) {
  const SymplecticSpectrum sp = symplectic_spectrum(s);
  require_strictly_mixed(sp, "u_matrix");
  const RMatrix j = symplectic_form(s.n_modes());
  // arccoth(2iVJ) = V^{1/2} arccoth(2H) V^{-1/2} with H = i V^{1/2} J V^{1/2}.
  const CMatrix f = hermitian_function(sp.h, [](double lam) {
    const double z = 2.0 * lam;
    return 0.5 * std::log((z + 1.0) / (z - 1.0));
  });
  const CMatrix arccoth = sp.sqrt_v.cast<Complex>() * f * sp.inv_sqrt_v.cast<Complex>();
  RMatrix u = real_part_checked(2.0 * kI * j.cast<Complex>() * arccoth, "u_matrix");
  const double asym = max_abs(u - u.transpose());
  if (asym > 1e-9 * std::max(1.0, max_abs(u))) {
    std::ostringstream os;
    os << "u_matrix: result is not symmetric (" << asym << ")";
    throw NumericalError(os.str());
  }
  return 0.5 * (u + u.transpose());
}

RMatrix theta_matrix(const GaussianState& s) {
  return u_matrix(s) - inverse_spd(s.covariance(), "theta_matrix");
}

RMatrix theta_series(const GaussianState& s, int terms) {
  if (terms < 1) throw ValidationError("theta_series: need at least one term");
  const Index dim = s.covariance().rows();
  const CMatrix j = symplectic_form(s.n_modes()).cast<Complex>();
  const CMatrix x = 0.5 * kI * j * inverse_spd(s.covariance(), "theta_series").cast<Complex>();
  const CMatrix x2 = x * x;
  CMatrix power = x * x2;  // x^3
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (int m = 1; m <= terms; ++m) {
    sum += (2.0 * kI / static_cast<double>(2 * m + 1)) * j * power;
    power = (power * x2).eval();
  }
  return real_part_checked(sum, "theta_series");
}

double vn_entropy_gaussian(const GaussianState& s) {
  const RVector nu = symplectic_eigenvalues(s);
  double out = 0.0;
  for (Index k = 0; k < nu.size(); ++k) {
    const double plus = nu(k) + 0.5;
    const double minus = nu(k) - 0.5;
    out += plus * std::log(plus);
    if (minus > 1e-300) out -= minus * std::log(minus);
  }
  return out;
}

double shannon_entropy_wigner(const GaussianState& s) {
  Eigen::LLT<RMatrix> llt(s.covariance());
  if (llt.info() != Eigen::Success) {
    throw DomainError("shannon_entropy_wigner: covariance is singular");
  }
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double n = static_cast<double>(s.n_modes());
  return 0.5 * log_det + n * std::log(2.0 * std::numbers::pi * std::numbers::e);
}

GaussianRates quantum_debruijn_rate(const GdsModel& m, const GaussianState& s) {
  require_matching(m, s, "quantum_debruijn_rate");
  const RMatrix u = u_matrix(s);
  GaussianRates r;
  r.delta = 0.5 * (m.diffusion() * u).trace() / m.hbar();
  r.psi = (m.symplectic() * m.dissipation() * u * s.covariance()).trace();
  r.rate = r.delta - r.psi;
  return r;
}

RMatrix dqfi_matrix_gaussian(const GaussianState& s, double hbar) {
  if (!(hbar > 0.0)) throw ValidationError("dqfi_matrix_gaussian: hbar must be positive");
  return u_matrix(s) / hbar;
}

CMatrix m_matrix_gaussian(const GaussianState& s) {
  const RMatrix u = u_matrix(s);
  const RMatrix j = symplectic_form(s.n_modes());
  return (s.covariance() * u).cast<Complex>() + 0.5 * kI * (j * u).cast<Complex>();
}

GaussianState stationary_covariance(const GdsModel& m) {
  RMatrix v;
  try {
    v = solve_sylvester_lyapunov(m.drift(), m.diffusion() / m.hbar());
  } catch (const DomainError& e) {
    throw DomainError(std::string("stationary_covariance: no stationary state; ") + e.what());
  }
  Eigen::FullPivLU<RMatrix> lu(m.drift());
  if (!lu.isInvertible()) throw DomainError("stationary_covariance: drift matrix is singular");
  return GaussianState(lu.solve(m.xi()), v);
}

double entropy_rate_gap(const GdsModel& m, const GaussianState& s) {
  require_matching(m, s, "entropy_rate_gap");
  return 0.5 * (theta_matrix(s) * covariance_derivative(m, s.covariance())).trace();
}

double shannon_debruijn_rate(const GdsModel& m, const GaussianState& s) {
  require_matching(m, s, "shannon_debruijn_rate");
  const RMatrix vinv = inverse_spd(s.covariance(), "shannon_debruijn_rate");
  return 0.5 * (m.diffusion() * vinv).trace() / m.hbar() - (m.symplectic() * m.dissipation()).trace();
}

std::vector<double> wigner_fisher_terms(const GdsModel& m, const GaussianState& s) {
  require_matching(m, s, "wigner_fisher_terms");
  const RMatrix vinv = inverse_spd(s.covariance(), "wigner_fisher_terms");
  const LangevinSet lang = m.langevin();
  std::vector<double> out;
  for (const RVector& o : lang.sigma) out.push_back(o.dot(vinv * o) / m.hbar());
  for (const RVector& o : lang.sigma_bar) out.push_back(o.dot(vinv * o) / m.hbar());
  return out;
}

}  // namespace qdb
