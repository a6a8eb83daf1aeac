#include "qdb/fock_bridge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdb/errors.hpp"
#include "qdb/rng.hpp"

namespace qdb {

namespace {

constexpr Complex kI{0.0, 1.0};

Index ipow(Index base, Index exp) {
  Index out = 1;
  for (Index i = 0; i < exp; ++i) out *= base;
  return out;
}

CMatrix single_mode_annihilation(Index cutoff) {
  CMatrix a = CMatrix::Zero(cutoff, cutoff);
  for (Index k = 0; k + 1 < cutoff; ++k) a(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
  return a;
}

CMatrix mode_operator(const CMatrix& single, Index n_modes, Index cutoff, Index mode) {
  const Index before = ipow(cutoff, mode);
  const Index after = ipow(cutoff, n_modes - mode - 1);
  CMatrix out = kron(CMatrix::Identity(before, before), single);
  return kron(out, CMatrix::Identity(after, after));
}

std::vector<CMatrix> raw_quadratures(Index n_modes, Index cutoff, double hbar) {
  const CMatrix a = single_mode_annihilation(cutoff);
  const double s = std::sqrt(0.5 * hbar);
  const CMatrix q = s * (a + a.adjoint());
  const CMatrix p = kI * s * (a.adjoint() - a);
  std::vector<CMatrix> x(2 * n_modes);
  for (Index k = 0; k < n_modes; ++k) {
    x[k] = mode_operator(q, n_modes, cutoff, k);
    x[n_modes + k] = mode_operator(p, n_modes, cutoff, k);
  }
  return x;
}

// Position of each truncated basis state inside a space with more levels.
std::vector<Index> embedding(Index n_modes, Index small, Index big) {
  const Index dim = ipow(small, n_modes);
  std::vector<Index> map(dim);
  for (Index i = 0; i < dim; ++i) {
    Index rest = i;
    Index target = 0;
    Index weight = 1;
    for (Index m = 0; m < n_modes; ++m) {
      const Index level = rest % small;
      rest /= small;
      target += level * weight;
      weight *= big;
    }
    map[i] = target;
  }
  return map;
}

CMatrix restrict_to(const CMatrix& big, const std::vector<Index>& map) {
  const Index d = static_cast<Index>(map.size());
  CMatrix out(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) out(i, j) = big(map[i], map[j]);
  }
  return out;
}

CMatrix embed_into(const CMatrix& small, const std::vector<Index>& map, Index big_dim) {
  CMatrix out = CMatrix::Zero(big_dim, big_dim);
  const Index d = static_cast<Index>(map.size());
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) out(map[i], map[j]) = small(i, j);
  }
  return out;
}

// sum_jk m_jk (x_j - mu_j)(x_k - mu_k) + sum_j v_j x_j, formed with one extra
// level and cut back so that every matrix element is exact.
CMatrix quadratic_operator(const FockTruncation& tr, const RMatrix& m, const RVector& mu,
                           const RVector& v) {
  const Index n = tr.n_modes;
  const Index big = tr.cutoff + 1;
  const std::vector<CMatrix> x = raw_quadratures(n, big, tr.hbar);
  const Index dim = x[0].rows();
  const CMatrix eye = CMatrix::Identity(dim, dim);
  std::vector<CMatrix> shifted(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) shifted[j] = x[j] - mu(static_cast<Index>(j)) * eye;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (std::size_t j = 0; j < x.size(); ++j) {
    CMatrix row = CMatrix::Zero(dim, dim);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double c = m(static_cast<Index>(j), static_cast<Index>(k));
      if (c != 0.0) row += c * shifted[k];
    }
    out += shifted[j] * row;
    out += v(static_cast<Index>(j)) * x[j];
  }
  return restrict_to(out, embedding(n, tr.cutoff, big));
}

std::vector<CMatrix> quadratures(const FockTruncation& tr) {
  tr.dim();
  return raw_quadratures(tr.n_modes, tr.cutoff, tr.hbar);
}

std::vector<CMatrix> j_quadratures(const FockTruncation& tr, const std::vector<CMatrix>& x) {
  const RMatrix j = symplectic_form(tr.n_modes);
  std::vector<CMatrix> jx(x.size());
  for (std::size_t r = 0; r < x.size(); ++r) {
    jx[r] = CMatrix::Zero(x[0].rows(), x[0].cols());
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double w = j(static_cast<Index>(r), static_cast<Index>(c));
      if (w != 0.0) jx[r] += w * x[c];
    }
  }
  return jx;
}

Index suggested_cutoff(const GaussianState& s, double hbar, double tail_tolerance) {
  const Index n = s.n_modes();
  double nbar = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double thermal = 0.5 * (s.covariance()(k, k) + s.covariance()(n + k, n + k)) - 0.5;
    const double disp =
        (s.mean()(k) * s.mean()(k) + s.mean()(n + k) * s.mean()(n + k)) / (2.0 * hbar);
    nbar = std::max(nbar, thermal + disp);
  }
  nbar = std::max(nbar, 1e-3);
  const double ratio = nbar / (nbar + 1.0);
  const double tol = tail_tolerance > 0.0 ? tail_tolerance : kDefaultTailTolerance;
  return static_cast<Index>(std::ceil(1.5 * std::log(tol) / std::log(ratio))) + 4;
}

// max |a - b| on the sub-block below cutoff - 2, and the scale of the entries.
std::pair<double, double> subblock_difference(const CMatrix& a, const CMatrix& b,
                                              const std::vector<Index>& keep) {
  double diff = 0.0;
  double scale = 0.0;
  for (Index j : keep) {
    for (Index i : keep) {
      diff = std::max(diff, std::abs(a(i, j) - b(i, j)));
      scale = std::max(scale, std::max(std::abs(a(i, j)), std::abs(b(i, j))));
    }
  }
  return {diff, scale};
}

CMatrix random_low_observable(const FockTruncation& tr, const std::vector<Index>& support,
                              NormalRng& rng) {
  const Index d = ipow(tr.cutoff, tr.n_modes);
  CMatrix o = CMatrix::Zero(d, d);
  for (Index j : support) {
    for (Index i : support) o(i, j) = Complex(rng.normal(), rng.normal());
  }
  return 0.5 * (o + o.adjoint());
}

CMatrix contract(const RMatrix& w, const std::vector<CMatrix>& ops) {
  const Index n = w.rows();
  CMatrix out = CMatrix::Zero(ops[0].rows(), ops[0].cols());
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      // tr(W O) = sum_jk W_kj O_jk
      const double c = w(k, j);
      if (c != 0.0) out += c * ops[static_cast<std::size_t>(j * n + k)];
    }
  }
  return out;
}

}  // namespace

Index FockTruncation::dim() const {
  if (n_modes < 1) throw ValidationError("FockTruncation: n_modes must be at least 1");
  if (cutoff < 2) throw ValidationError("FockTruncation: cutoff must be at least 2");
  if (!(hbar > 0.0)) throw ValidationError("FockTruncation: hbar must be positive");
  double total = 1.0;
  for (Index k = 0; k < n_modes; ++k) total *= static_cast<double>(cutoff);
  if (total > static_cast<double>(max_dim)) {
    std::ostringstream os;
    os << "FockTruncation: dimension " << cutoff << "^" << n_modes << " exceeds the maximum "
       << max_dim;
    throw ValidationError(os.str());
  }
  return static_cast<Index>(total);
}

CMatrix annihilation_operator(const FockTruncation& tr, Index mode) {
  tr.dim();
  if (mode < 0 || mode >= tr.n_modes) throw ValidationError("annihilation_operator: no such mode");
  return mode_operator(single_mode_annihilation(tr.cutoff), tr.n_modes, tr.cutoff, mode);
}

std::vector<HermitianMatrix> quadrature_operators(const FockTruncation& tr) {
  std::vector<HermitianMatrix> out;
  for (const CMatrix& x : quadratures(tr)) out.emplace_back(x);
  return out;
}

std::vector<Index> subblock_indices(const FockTruncation& tr, Index levels) {
  const Index d = tr.dim();
  std::vector<Index> out;
  for (Index i = 0; i < d; ++i) {
    Index rest = i;
    bool inside = true;
    for (Index m = 0; m < tr.n_modes; ++m) {
      if (rest % tr.cutoff >= levels) inside = false;
      rest /= tr.cutoff;
    }
    if (inside) out.push_back(i);
  }
  return out;
}

double ccr_subblock_error(const FockTruncation& tr) {
  if (tr.cutoff < 3) throw ValidationError("ccr_subblock_error: cutoff must be at least 3");
  const std::vector<CMatrix> x = quadratures(tr);
  const RMatrix j = symplectic_form(tr.n_modes);
  const std::vector<Index> keep = subblock_indices(tr, tr.cutoff - 2);
  const Index d = x[0].rows();
  double worst = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    for (std::size_t c = 0; c < x.size(); ++c) {
      const CMatrix expected = kI * tr.hbar * j(static_cast<Index>(r), static_cast<Index>(c)) *
                               CMatrix::Identity(d, d);
      worst = std::max(worst, subblock_difference(commutator(x[r], x[c]), expected, keep).first);
    }
  }
  return worst;
}

LindbladModel lift_model(const GdsModel& g, const FockTruncation& tr) {
  if (g.n_modes() != tr.n_modes) throw ValidationError("lift_model: mode counts differ");
  if (std::abs(g.hbar() - tr.hbar) > 1e-15 * std::max(1.0, g.hbar())) {
    throw ValidationError("lift_model: model and truncation use different hbar");
  }
  tr.dim();
  const RMatrix& j = g.symplectic();
  const Index dim2 = g.phase_dim();
  const CMatrix h = quadratic_operator(tr, 0.5 * g.b_matrix(), RVector::Zero(dim2), j * g.xi());
  const std::vector<CMatrix> x = quadratures(tr);
  std::vector<CMatrix> lindblads;
  for (const CVector& l : g.lindblad_vectors()) {
    const CVector coeff = j.transpose().cast<Complex>() * l;  // (l^T J)_k
    CMatrix op = CMatrix::Zero(x[0].rows(), x[0].cols());
    for (Index k = 0; k < dim2; ++k) op += coeff(k) * x[static_cast<std::size_t>(k)];
    lindblads.push_back(std::move(op));
  }
  return LindbladModel(HermitianMatrix(h, 1e-9), std::move(lindblads), g.hbar());
}

LiftedState lift_state(const GaussianState& s, const FockTruncation& tr, double tail_tolerance) {
  if (s.n_modes() != tr.n_modes) throw ValidationError("lift_state: mode counts differ");
  tr.dim();
  const RMatrix u = u_matrix(s);
  const Index dim2 = 2 * tr.n_modes;
  const CMatrix q = quadratic_operator(tr, u, s.mean(), RVector::Zero(dim2));
  const EigenDecomposition eig = herm_eig(HermitianMatrix(q / (2.0 * tr.hbar), 1e-8));

  // exp(-e) summed with the smallest exponent factored out.
  const double e0 = eig.values.minCoeff();
  double partial = 0.0;
  for (Index i = 0; i < eig.values.size(); ++i) partial += std::exp(-(eig.values(i) - e0));
  const double log_z = std::log(partial) - e0;

  LiftedState out;
  out.z_truncated = std::exp(log_z);
  const RMatrix j = symplectic_form(tr.n_modes);
  const CMatrix vj = s.covariance().cast<Complex>() + 0.5 * kI * j.cast<Complex>();
  out.z_gaussian = std::sqrt(std::max(0.0, vj.determinant().real()));
  out.tail_mass = 1.0 - out.z_truncated / out.z_gaussian;
  if (tail_tolerance >= 0.0 && out.tail_mass > tail_tolerance) {
    std::ostringstream os;
    os << "lift_state: tail mass " << out.tail_mass << " beyond cutoff " << tr.cutoff
       << " exceeds " << tail_tolerance << "; use a cutoff of at least "
       << suggested_cutoff(s, tr.hbar, tail_tolerance);
    throw DomainError(os.str());
  }

  RVector weights(eig.values.size());
  for (Index i = 0; i < weights.size(); ++i) weights(i) = std::exp(-eig.values(i) - log_z);
  const CMatrix rho = eig.vectors * weights.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  out.rho = DensityMatrix(rho, DensityTolerance{1e-10, 1e-10, 1e-9});
  out.log_rho = -q / (2.0 * tr.hbar) - log_z * CMatrix::Identity(q.rows(), q.cols());
  return out;
}

GaussianState extract_moments(const DensityMatrix& rho, const FockTruncation& tr) {
  const Index d = tr.dim();
  require_square(rho.matrix(), d, "extract_moments");
  const Index big = tr.cutoff + 1;
  const std::vector<CMatrix> x = raw_quadratures(tr.n_modes, big, tr.hbar);
  const Index big_dim = x[0].rows();
  const CMatrix r = embed_into(rho.matrix(), embedding(tr.n_modes, tr.cutoff, big), big_dim);
  const Index dim2 = 2 * tr.n_modes;
  const auto expect = [&r](const CMatrix& o) { return (r.cwiseProduct(o.transpose())).sum().real(); };
  RVector mean(dim2);
  for (Index j = 0; j < dim2; ++j) mean(j) = expect(x[static_cast<std::size_t>(j)]);
  RMatrix v(dim2, dim2);
  for (Index j = 0; j < dim2; ++j) {
    for (Index k = 0; k <= j; ++k) {
      const CMatrix& xj = x[static_cast<std::size_t>(j)];
      const CMatrix& xk = x[static_cast<std::size_t>(k)];
      const double sym = 0.5 * expect(xj * xk + xk * xj);
      v(j, k) = v(k, j) = (sym - mean(j) * mean(k)) / tr.hbar;
    }
  }
  return GaussianState(mean, v);
}

std::vector<CMatrix> hhat(const FockTruncation& tr, const CMatrix& o) {
  const std::vector<CMatrix> x = quadratures(tr);
  require_square(o, x[0].rows(), "hhat");
  const std::vector<CMatrix> jx = j_quadratures(tr, x);
  const double scale = -1.0 / (tr.hbar * tr.hbar);
  std::vector<CMatrix> inner(jx.size());
  for (std::size_t k = 0; k < jx.size(); ++k) inner[k] = commutator(jx[k], o);
  std::vector<CMatrix> out;
  out.reserve(jx.size() * jx.size());
  for (std::size_t j = 0; j < jx.size(); ++j) {
    for (std::size_t k = 0; k < jx.size(); ++k) out.push_back(scale * commutator(jx[j], inner[k]));
  }
  return out;
}

std::vector<CMatrix> mhat(const FockTruncation& tr, const CMatrix& o) {
  const std::vector<CMatrix> x = quadratures(tr);
  require_square(o, x[0].rows(), "mhat");
  const std::vector<CMatrix> jx = j_quadratures(tr, x);
  const Complex scale = kI / tr.hbar;
  std::vector<CMatrix> inner(jx.size());
  for (std::size_t k = 0; k < jx.size(); ++k) inner[k] = commutator(jx[k], o);
  std::vector<CMatrix> out;
  out.reserve(x.size() * x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    for (std::size_t k = 0; k < x.size(); ++k) out.push_back(scale * x[j] * inner[k]);
  }
  return out;
}

bool CrossValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed(); });
}

double CrossValidationReport::rate_discrepancy() const {
  return std::max(std::abs(delta_lindblad - delta_gaussian), std::abs(psi_lindblad - psi_gaussian));
}

std::string CrossValidationReport::diagnostics() const {
  std::ostringstream os;
  for (const IdentityCheck& c : checks) {
    if (c.passed()) continue;
    os << "identity '" << c.name << "' failed: error " << c.error << " > tolerance " << c.tolerance;
    if (c.name == "delta") os << " (Fock " << delta_lindblad << ", Gaussian " << delta_gaussian << ")";
    if (c.name == "psi") os << " (Fock " << psi_lindblad << ", Gaussian " << psi_gaussian << ")";
    os << "\n";
  }
  return os.str();
}

CrossValidationReport cross_validate_rates(const GdsModel& g, const GaussianState& s,
                                           const FockTruncation& tr,
                                           const CrossValidationOptions& options) {
  if (tr.cutoff < 5) throw ValidationError("cross_validate_rates: cutoff must be at least 5");
  const LindbladModel model = lift_model(g, tr);
  const LiftedState lifted = lift_state(s, tr, options.tail_tolerance);
  const CMatrix& rho = lifted.rho.matrix();
  const Index n2 = g.phase_dim();

  CrossValidationReport r;
  r.tail_mass = lifted.tail_mass;
  const FluctuationDissipation fd = fluctuation_dissipation_terms(model, rho, lifted.log_rho);
  r.delta_lindblad = fd.delta;
  r.psi_lindblad = fd.psi;
  const GaussianRates gr = quantum_debruijn_rate(g, s);
  r.delta_gaussian = gr.delta;
  r.psi_gaussian = gr.psi;
  r.eps_trunc = 10.0 * std::max(0.0, lifted.tail_mass) *
                std::max(1.0, std::abs(gr.delta) + std::abs(gr.psi));
  r.tolerance = std::max(options.rate_tolerance, r.eps_trunc);
  r.checks.push_back({"delta", std::abs(r.delta_lindblad - r.delta_gaussian), r.tolerance});
  r.checks.push_back({"psi", std::abs(r.psi_lindblad - r.psi_gaussian), r.tolerance});

  const auto tr_rho = [&rho](const CMatrix& o) { return (rho.cwiseProduct(o.transpose())).sum(); };
  const std::vector<CMatrix> h_ops = hhat(tr, lifted.log_rho);
  const std::vector<CMatrix> m_ops = mhat(tr, lifted.log_rho);
  r.dqfi_lindblad.resize(n2, n2);
  r.m_lindblad.resize(n2, n2);
  for (Index j = 0; j < n2; ++j) {
    for (Index k = 0; k < n2; ++k) {
      const std::size_t idx = static_cast<std::size_t>(j * n2 + k);
      r.dqfi_lindblad(j, k) = -tr_rho(h_ops[idx]).real();
      r.m_lindblad(j, k) = -tr_rho(m_ops[idx]);
    }
  }
  r.dqfi_gaussian = dqfi_matrix_gaussian(s, g.hbar());
  r.m_gaussian = m_matrix_gaussian(s);
  const double jq_scale = std::max(1.0, r.dqfi_gaussian.cwiseAbs().maxCoeff());
  r.checks.push_back({"dqfi_matrix", (r.dqfi_lindblad - r.dqfi_gaussian).cwiseAbs().maxCoeff(),
                      r.tolerance * jq_scale});
  const double m_scale = std::max(1.0, r.m_gaussian.cwiseAbs().maxCoeff());
  r.checks.push_back({"m_matrix", (r.m_lindblad - r.m_gaussian).cwiseAbs().maxCoeff(),
                      r.tolerance * m_scale});

  // Phase-space forms of the generator pieces on random low-lying observables.
  const std::vector<Index> support = subblock_indices(tr, tr.cutoff - 3);
  const std::vector<Index> keep = subblock_indices(tr, tr.cutoff - 2);
  const RMatrix& d = g.diffusion();
  const RMatrix cj = g.dissipation() * g.symplectic();
  const double half_tr_jc = 0.5 * (g.symplectic() * g.dissipation()).trace();
  NormalRng rng(options.seed);
  double err_l1 = 0.0, err_l2 = 0.0, err_l3 = 0.0, err_lme = 0.0;
  double sc_l1 = 1.0, sc_l2 = 1.0, sc_l3 = 1.0, sc_lme = 1.0;
  const auto track = [&keep](const CMatrix& a, const CMatrix& b, double& err, double& scale) {
    const auto [diff, mag] = subblock_difference(a, b, keep);
    err = std::max(err, diff);
    scale = std::max(scale, mag);
  };
  for (int trial = 0; trial < options.n_observables; ++trial) {
    const CMatrix o = random_low_observable(tr, support, rng);
    const std::vector<CMatrix> ho = hhat(tr, o);
    const std::vector<CMatrix> mo = mhat(tr, o);
    const CMatrix l1_phase = 0.5 * contract(d, ho);
    const CMatrix l2_phase = half_tr_jc * o;
    const CMatrix l3_phase = contract(cj, mo) + l2_phase;
    track(apply_l1(model, o), l1_phase, err_l1, sc_l1);
    track(apply_l2(model, o), l2_phase, err_l2, sc_l2);
    track(apply_l3(model, o), l3_phase, err_l3, sc_l3);
    const CMatrix lme = apply_lu(model, o) + l1_phase + 2.0 * half_tr_jc * o + contract(cj, mo);
    track(apply(Generator::Total, model, o), lme, err_lme, sc_lme);
  }
  r.checks.push_back({"appendix_b_l1", err_l1, 1e-9 * sc_l1});
  r.checks.push_back({"appendix_b_l2", err_l2, 1e-9 * sc_l2});
  r.checks.push_back({"appendix_b_l3", err_l3, 1e-9 * sc_l3});
  r.checks.push_back({"linear_lme", err_lme, 1e-9 * sc_lme});
  return r;
}

}  // namespace qdb
