// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "qdb/classical_ou.hpp"
#include "qdb/dqfi.hpp"
#include "qdb/errors.hpp"
#include "qdb/fock_bridge.hpp"
#include "qdb/gaussian.hpp"
#include "qdb/lindblad.hpp"
#include "support/random_models.hpp"

namespace {

using namespace qdb;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome generator_decomposition() {
  NormalRng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 2 + trial % 7;
    const LindbladModel m = testing::random_lindblad_model(d, 1 + trial % 3, rng, 0.5 + rng.uniform());
    const CMatrix o = testing::random_complex(d, d, rng);
    const CMatrix sum = apply_l1(m, o) + apply_l2(m, o) + apply_l3(m, o);
    worst = std::max(worst, (sum - apply_lnu(m, o)).norm());
  }
  return {worst <= 1e-10, format("max ||L1+L2+L3-L_NU||_F = %.3g over 100 models, dim 2-8", worst)};
}

Outcome entropy_rate_identity() {
  NormalRng rng(102);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 2 + trial % 2;
    const LindbladModel m = testing::random_lindblad_model(d, 2, rng, 0.5 + rng.uniform());
    const DensityMatrix rho = testing::random_density(d, rng);
    const EntropyRateReport r = entropy_rate_report(m, rho, default_fd_step(m));
    worst = std::max(worst, std::abs(r.rate_fd - (r.delta - r.psi)));
  }
  return {worst <= 1e-6, format("max |dS/dt_fd - (Delta - Psi)| = %.3g over 50 qubit/qutrit cases", worst)};
}

Outcome dqfi_oracle() {
  NormalRng rng(103);
  double worst_ratio = 0.0;
  int violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 2 + trial % 2;
    const UnitaryOrbitFamily f{testing::random_density(d, rng), testing::random_hermitian(d, rng), 1.0};
    const DqfiEstimate e = dqfi_finite_difference_estimate(f);
    const double exact = dqfi_commutator(f.base_state, f.generator);
    const double err = std::abs(e.value - exact);
    if (err > e.tolerance) ++violations;
    worst_ratio = std::max(worst_ratio, err / e.tolerance);
  }
  // Quadratic expansion S[rho_theta || rho] / (J theta^2 / 2) over one decade.
  NormalRng rng2(1031);
  bool monotone = true;
  double final_gap = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const UnitaryOrbitFamily f{testing::random_density(3, rng2), testing::random_hermitian(3, rng2), 1.0};
    const double j = dqfi_commutator(f.base_state, f.generator);
    double previous = 1e300;
    for (double theta : {1e-1, 3e-2, 1e-2}) {
      const double gap = std::abs(relative_entropy(f.at(theta), f.base_state) / (0.5 * j * theta * theta) - 1.0);
      monotone = monotone && gap < previous;
      previous = gap;
    }
    final_gap = std::max(final_gap, previous);
  }
  const bool ok = violations == 0 && monotone && final_gap < 1e-2;
  return {ok, format("50 pairs: %d outside max(1e-5, C4 h^2), worst err/tol = %.3g; ratio test "
                     "monotone=%s, |ratio-1| at 1e-2 = %.3g",
                     violations, worst_ratio, monotone ? "yes" : "no", final_gap)};
}

Outcome delta_from_dqfi_check() {
  NormalRng rng(104);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 2 + trial % 3;
    const LindbladModel m = testing::random_lindblad_model(d, 2, rng, 0.3 + 2.0 * rng.uniform());
    const DensityMatrix rho = testing::random_density(d, rng);
    const double trace_form =
        fluctuation_dissipation_terms(m, rho.matrix(), matrix_log_psd(rho).matrix()).delta;
    worst = std::max(worst, std::abs(delta_from_dqfi(m, rho) - trace_form));
  }
  // Dephasing L = sqrt(hbar gamma) sz on rho = 1/2 + c sx.
  const double c = 0.25;
  const double gamma = 1.0;
  CMatrix sz(2, 2), sx(2, 2);
  sz << 1, 0, 0, -1;
  sx << 0, 1, 1, 0;
  const DensityMatrix rho(0.5 * CMatrix::Identity(2, 2) + c * sx);
  const LindbladModel deph(HermitianMatrix::zero(2), {std::sqrt(gamma) * sz});
  const double closed = 2.0 * gamma * c * std::log((1 + 2 * c) / (1 - 2 * c));
  // Frozen value from tests/oracles/gen_oracles.py (dephasing.delta).
  constexpr double kOracle = 0.5493061443340546;
  const double err_closed = std::abs(delta_from_dqfi(deph, rho) - closed);
  const double err_oracle = std::abs(closed - kOracle);
  const bool ok = worst <= 1e-9 && err_closed <= 1e-8 && err_oracle <= 1e-12 &&
                  std::abs(closed - 0.5 * std::log(3.0)) <= 1e-15;
  return {ok, format("max |Delta_dqfi - Delta_L1| = %.3g; dephasing |Delta - ln(3)/2| = %.3g", worst, err_closed)};
}

Outcome gauge_invariance() {
  NormalRng rng(105);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 2 + trial % 3;
    const Index k = 1 + trial % 3;
    const LindbladModel m = testing::random_lindblad_model(d, k, rng, 0.5 + rng.uniform());
    std::vector<Complex> alphas;
    for (Index i = 0; i < k; ++i) alphas.emplace_back(rng.normal(), rng.normal());
    const LindbladModel g = gauge_transform(m, alphas);
    const DensityMatrix rho = testing::random_density(d, rng);
    const CMatrix lr = matrix_log_psd(rho).matrix();
    const FluctuationDissipation a = fluctuation_dissipation_terms(m, rho.matrix(), lr);
    const FluctuationDissipation b = fluctuation_dissipation_terms(g, rho.matrix(), lr);
    worst = std::max({worst, std::abs(a.delta - b.delta), std::abs(a.psi - b.psi)});
  }
  return {worst <= 1e-8, format("max change of Delta, Psi under alpha-shifts = %.3g over 20 models", worst)};
}

template <class F>
double flow_derivative(const GdsModel& m, const GaussianState& s, double h, F f) {
  const auto at = [&](double t) { return f(evolve_moments(m, s, t)); };
  return (at(0.0) - 8 * at(h) + 8 * at(3 * h) - at(4 * h)) / (12 * h);
}

Outcome gaussian_debruijn() {
  NormalRng rng(106);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + trial % 2;
    const GdsModel m = testing::random_stable_gds(n, rng, 0.5 + rng.uniform());
    const GaussianState s = testing::random_gaussian_state(n, rng);
    const double h = 5e-4;
    const double fd = flow_derivative(m, s, h, [](const GaussianState& x) { return vn_entropy_gaussian(x); });
    worst = std::max(worst, std::abs(fd - quantum_debruijn_rate(m, evolve_moments(m, s, 2 * h)).rate));
  }
  // Koenig-Smith: D = 1/2, C = 0.
  double psi_max = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const double s = 1.0 / std::sqrt(2.0);
    const RMatrix g = testing::random_real(2, 2, rng);
    const GdsModel ks(1, 1.0, g * g.transpose(), RVector::Zero(2),
                      {(CVector(2) << s, 0).finished(), (CVector(2) << 0, s).finished()});
    psi_max = std::max(psi_max, std::abs(quantum_debruijn_rate(ks, testing::random_gaussian_state(1, rng)).psi));
  }
  return {worst <= 1e-6 && psi_max == 0.0,
          format("max |dS/dt_fd - rate| = %.3g over 50 models; Koenig-Smith max |Psi| = %.3g", worst, psi_max)};
}

struct SingleModeScenario {
  const char* name;
  GdsModel model;
  GaussianState state;
};

std::vector<SingleModeScenario> single_mode_scenarios() {
  const double s = 1.0 / std::sqrt(2.0);
  const GdsModel diffusion(1, 1.0, RMatrix::Zero(2, 2), RVector::Zero(2),
                           {(CVector(2) << s, 0).finished(), (CVector(2) << 0, s).finished()});
  const GdsModel optical(1, 1.0, RMatrix::Identity(2, 2), RVector::Zero(2),
                         optical_lindblad_vectors(1.0, 1.0, 0.5));
  const double gamma = 0.4;
  const double nbar = 0.5;
  const Complex i{0.0, 1.0};
  const double down = std::sqrt(gamma * (nbar + 1) / 2);
  const double up = std::sqrt(gamma * nbar / 2);
  const GdsModel damped(1, 1.0, RMatrix::Identity(2, 2), RVector::Zero(2),
                        {(CVector(2) << i * down, -down).finished(), (CVector(2) << -i * up, -up).finished()});
  RMatrix v0(2, 2);
  v0 << 1.4, 0.1, 0.1, 0.8;
  return {{"quantum_diffusion", diffusion, GaussianState::thermal(1, 1.0)},
          {"optical_master_equation", optical, stationary_covariance(optical)},
          {"damped_oscillator", damped, GaussianState((RVector(2) << 0.5, 0.0).finished(), v0)}};
}

Outcome cross_validation() {
  std::string detail;
  bool ok = true;
  for (const SingleModeScenario& sc : single_mode_scenarios()) {
    const CrossValidationReport r = cross_validate_rates(sc.model, sc.state, FockTruncation{1, 40});
    const double tol = std::max(1e-5, r.eps_trunc);
    const bool pass = r.passed() && r.rate_discrepancy() <= tol;
    ok = ok && pass;
    if (!pass) detail += format("[%s: %s] ", sc.name, r.diagnostics().c_str());
    // Doubling study with the tail check off: each doubling must shrink the
    // discrepancy until it reaches the roundoff floor.
    CrossValidationOptions opts;
    opts.tail_tolerance = -1.0;
    constexpr double kFloor = 1e-9;
    double previous = 1e300;
    std::string seq;
    for (Index cutoff : {10, 20, 40, 80}) {
      const double d = cross_validate_rates(sc.model, sc.state, FockTruncation{1, cutoff}, opts).rate_discrepancy();
      if (!(d < previous || d <= kFloor)) ok = false;
      previous = d;
      seq += format("%s%.2g", seq.empty() ? "" : "->", d);
    }
    detail += format("%s: disc@40 %.2g, doubling 10..80 %s; ", sc.name, r.rate_discrepancy(), seq.c_str());
  }
  return {ok, detail};
}

Outcome stationarity() {
  const double hbar = 1.0;
  const double gamma = 1.0;
  const double alpha = 0.5;
  const GdsModel m(1, hbar, RMatrix::Identity(2, 2), RVector::Zero(2), optical_lindblad_vectors(hbar, gamma, alpha));
  const GaussianState vs = stationary_covariance(m);
  const double lyap_err = (vs.covariance() - gamma / (2 * hbar * alpha) * RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff();
  // gamma_eff: slowest decay rate of the drift, -max Re spec(A).
  const double gamma_eff = -spectral_abscissa(m.drift());
  const GaussianState start(vs.mean(), 2.0 * vs.covariance());
  const GaussianState late = evolve_moments(m, start, 10.0 / gamma_eff);
  const double v_err = (late.covariance() - vs.covariance()).norm();
  const GaussianRates r = quantum_debruijn_rate(m, late);
  const double rate = std::abs(r.delta - r.psi);
  return {lyap_err <= 1e-10 && v_err <= 1e-6 && rate <= 1e-6,
          format("|V_S - gamma/(2 hbar alpha)| = %.3g; at t = 10/gamma_eff = %.3g: ||V - V_S|| = %.3g, "
                 "|Delta - Psi| = %.3g",
                 lyap_err, 10.0 / gamma_eff, v_err, rate)};
}

Outcome classical_debruijn() {
  NormalRng rng(109);
  double worst = 0.0;
  double stiefel = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + trial % 3;
    const Index mcols = 1 + trial % 2;
    const OuModel m = testing::random_stable_ou(n, mcols, rng);
    const GaussianDensity g = testing::random_density_ou(n, rng);
    const double h = 5e-4;
    const auto at = [&](double t) { return differential_entropy(evolve_density(m, g, t)); };
    const double fd = (at(0.0) - 8 * at(h) + 8 * at(3 * h) - at(4 * h)) / (12 * h);
    worst = std::max(worst, std::abs(fd - debruijn_rate(m, evolve_density(m, g, 2 * h)).rate));

    // Sigma -> Sigma Q with Q (mcols x mcols + 2) having orthonormal rows.
    const RMatrix raw = testing::random_real(mcols + 2, mcols + 2, rng);
    const RMatrix q = Eigen::HouseholderQR<RMatrix>(raw).householderQ();
    const RMatrix rows = q.topRows(mcols);
    const OuModel re(m.drift(), m.noise() * rows, m.offset());
    const ClassicalRates a = debruijn_rate(m, g);
    const ClassicalRates b = debruijn_rate(re, g);
    double sum_a = 0.0, sum_b = 0.0;
    for (double t : langevin_fisher_decomposition(m, g)) sum_a += 0.5 * t;
    for (double t : langevin_fisher_decomposition(re, g)) sum_b += 0.5 * t;
    stiefel = std::max({stiefel, std::abs(a.diffusion_term - b.diffusion_term), std::abs(sum_a - sum_b)});
  }
  // Heat channel: D = 1, sigma0^2 = 1.5; rate = 1 / (2 (sigma0^2 + t)).
  const OuModel heat(RMatrix::Zero(1, 1), RMatrix::Constant(1, 1, 1.0), RVector::Zero(1));
  const GaussianDensity g0(RVector::Zero(1), RMatrix::Constant(1, 1, 1.5));
  double heat_err = 0.0;
  for (double t : {0.0, 0.5, 1.0, 4.0}) {
    heat_err = std::max(heat_err, std::abs(debruijn_rate(heat, evolve_density(heat, g0, t)).rate - 1.0 / (2 * (1.5 + t))));
  }
  return {worst <= 1e-6 && heat_err <= 1e-9 && stiefel <= 1e-10,
          format("max |dh/dt_fd - rate| = %.3g over 50 models; heat channel err = %.3g; Stiefel change = %.3g",
                 worst, heat_err, stiefel)};
}

Outcome monte_carlo() {
  RMatrix a(2, 2);
  a << -0.8, 1.3, -1.3, -0.8;
  RMatrix sigma(2, 2);
  sigma << 0.9, 0.2, 0.0, 0.7;
  const OuModel m(a, sigma, (RVector(2) << 0.2, -0.1).finished());
  const GaussianDensity g0((RVector(2) << 1.0, -0.5).finished(), (RMatrix(2, 2) << 0.3, 0.05, 0.05, 0.2).finished());
  const double t = 1.0;
  const GaussianDensity analytic = evolve_density(m, g0, t);
  const RMatrix first = simulate_sde(m, gaussian_sampler(g0), t, 1e-3, 100000, 2024, &g0);
  const MomentComparison cmp = compare_moments(first, analytic);
  const RMatrix second = simulate_sde(m, gaussian_sampler(g0), t, 1e-3, 100000, 2024, &g0, 1);
  const bool identical = (first.array() == second.array()).all();
  return {cmp.max_mean_z <= 5.0 && cmp.max_covariance_z <= 5.0 && identical,
          format("1e5 paths, step 1e-3: max mean z = %.2f, max cov z = %.2f; rerun bit-identical: %s",
                 cmp.max_mean_z, cmp.max_covariance_z, identical ? "yes" : "no")};
}

Outcome spohn() {
  NormalRng rng(111);
  double min_pi = 1e300;
  double worst_balance = 0.0;
  int models = 0;
  while (models < 10) {
    const Index d = 2 + models % 3;
    const LindbladModel m = testing::random_lindblad_model(d, 2, rng, 0.5 + rng.uniform());
    DensityMatrix rs;
    try {
      rs = stationary_state(m);
    } catch (const DomainError&) {
      continue;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rs.matrix(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= kFullRankThreshold) continue;
    ++models;
    const double h = default_fd_step(m);
    const DensityMatrix rho0 = testing::random_density(d, rng);
    for (double t : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
      const DensityMatrix rho = t == 0.0 ? rho0 : evolve(m, rho0, t);
      min_pi = std::min(min_pi, spohn_production(m, rho, rs, h).pi);
    }
    const SpohnProduction at_s = spohn_production(m, rs, rs, h);
    worst_balance = std::max(worst_balance, std::abs(at_s.pi - at_s.phi_dot));
  }
  return {min_pi >= -1e-6 && worst_balance <= 1e-6,
          format("min Pi along 10 trajectories = %.3g; max |Pi - Phi_dot| at rho_s = %.3g", min_pi, worst_balance)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "generator decomposition", 5, generator_decomposition},
      {2, "entropy-rate identity", 30, entropy_rate_identity},
      {3, "DQFI oracle", 30, dqfi_oracle},
      {4, "Delta from DQFI", 30, delta_from_dqfi_check},
      {5, "gauge invariance", 30, gauge_invariance},
      {6, "quantum de Bruijn for GDS", 60, gaussian_debruijn},
      {7, "Fock cross-validation", 300, cross_validation},
      {8, "stationarity", 30, stationarity},
      {9, "classical de Bruijn", 30, classical_debruijn},
      {10, "Monte Carlo consistency", 120, monte_carlo},
      {11, "Spohn production", 60, spohn},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) {
      out.passed = false;
      out.detail += format(" [over budget %.0f s]", c.budget_seconds);
    }
    if (!out.passed) ++failures;
    std::printf("%s criterion %2d (%s): %s (%.2f s)\n", out.passed ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
