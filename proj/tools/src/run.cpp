#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "qdb/classical_ou.hpp"
#include "qdb/dqfi.hpp"
#include "qdb/errors.hpp"
#include "qdb/fock_bridge.hpp"
#include "qdb/gaussian.hpp"
#include "qdb/lindblad.hpp"
#include "qdb/version.hpp"
#include "qdb_tools/scenario.hpp"

namespace qdb::tools {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDefaultFlowStep = 5e-4;

// Largest error seen for one identity across the grid.
class Tracker {
 public:
  Tracker(std::string name, double tolerance) : result_{std::move(name), 0.0, tolerance} {}
  void add(double error) {
    if (std::isnan(error)) error = std::numeric_limits<double>::infinity();
    result_.max_error = std::max(result_.max_error, error);
  }
  const IdentityResult& result() const { return result_; }

 private:
  IdentityResult result_;
};

// d/dt f(t) at t from five samples; centred when t >= 2h, forward otherwise.
template <class F>
double five_point(const F& f, double t, double h) {
  if (t >= 2.0 * h) return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h);
  return (-25 * f(t) + 48 * f(t + h) - 36 * f(t + 2 * h) + 16 * f(t + 3 * h) - 3 * f(t + 4 * h)) / (12 * h);
}

GdsModel make_gds(const ScenarioConfig& cfg) {
  return GdsModel(cfg.gds.n_modes, cfg.hbar, cfg.gds.b_matrix, cfg.gds.xi, cfg.gds.lindblad_vectors);
}

GaussianState make_gaussian_initial(const ScenarioConfig& cfg, const GdsModel& m) {
  const GaussianInitial& init = cfg.gaussian_initial;
  if (init.stationary_scale) {
    const GaussianState vs = stationary_covariance(m);
    return GaussianState(vs.mean(), *init.stationary_scale * vs.covariance());
  }
  return GaussianState(init.mean, init.covariance);
}

void run_gds(const ScenarioConfig& cfg, double h, RunReport& r) {
  const GdsModel m = make_gds(cfg);
  const GaussianState s0 = make_gaussian_initial(cfg, m);
  r.columns = {"t", "S_vn", "h_wigner", "delta", "psi", "rate_analytic", "rate_fd", "gap_theta", "nu_min"};

  Tracker rate_fd("debruijn_rate_fd", 1e-6);
  Tracker half_trace("rate_half_trace_u_dvdt", 1e-9);
  Tracker shannon_fd("shannon_rate_fd", 1e-6);
  Tracker gap("gap_decomposition", 1e-8);
  Tracker purity("quantum_covariance", 1e-8);
  Tracker psi_zero("psi_zero", 1e-12);

  const auto at = [&](double t) { return evolve_moments(m, s0, t); };
  const auto entropy = [&](double t) { return vn_entropy_gaussian(at(t)); };
  const auto shannon = [&](double t) { return shannon_entropy_wigner(at(t)); };

  GaussianState last = s0;
  for (double t : cfg.time_grid.points()) {
    const GaussianState s = at(t);
    const GaussianRates q = quantum_debruijn_rate(m, s);
    const double fd = five_point(entropy, t, h);
    const double shannon_rate = shannon_debruijn_rate(m, s);
    const double theta_gap = entropy_rate_gap(m, s);
    const double nu_min = symplectic_eigenvalues(s)(0);
    const double half = 0.5 * (u_matrix(s) * covariance_derivative(m, s.covariance())).trace();

    rate_fd.add(std::abs(fd - q.rate));
    half_trace.add(std::abs(half - q.rate));
    shannon_fd.add(std::abs(five_point(shannon, t, h) - shannon_rate));
    gap.add(std::abs(theta_gap - (q.rate - shannon_rate)));
    purity.add(std::max(0.0, 0.5 - nu_min));
    psi_zero.add(std::abs(q.psi));
    r.rows.push_back({t, vn_entropy_gaussian(s), shannon_entropy_wigner(s), q.delta, q.psi, q.rate, fd, theta_gap,
                      nu_min});
    last = s;
  }
  for (const Tracker* tr : {&rate_fd, &half_trace, &shannon_fd, &gap, &purity}) r.identities.push_back(tr->result());
  if (cfg.expect.psi_zero) r.identities.push_back(psi_zero.result());
  if (cfg.expect.reaches_stationary) {
    const GaussianState vs = stationary_covariance(m);
    const GaussianRates q = quantum_debruijn_rate(m, last);
    r.identities.push_back({"stationary_covariance", (last.covariance() - vs.covariance()).norm(), 1e-6});
    r.identities.push_back({"stationary_rate", std::abs(q.delta - q.psi), 1e-6});
  }
}

void run_finite(const ScenarioConfig& cfg, std::optional<double> h_override, RunReport& r) {
  const LindbladModel m(HermitianMatrix(cfg.finite.hamiltonian, 1e-10), cfg.finite.lindblad_operators, cfg.hbar);
  const DensityMatrix rho0(cfg.finite.initial_density, DensityTolerance{1e-10, 1e-10, 1e-9});
  const double h = h_override.value_or(default_fd_step(m));
  r.columns = {"t", "S_vn", "delta", "psi", "rate_fd", "spohn_pi", "phi_dot"};

  std::optional<DensityMatrix> stationary;
  try {
    DensityMatrix s = stationary_state(m);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(s.matrix(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() > kFullRankThreshold) {
      stationary = std::move(s);
    } else {
      r.notes.push_back("stationary state is not full rank; Spohn columns are nan");
    }
  } catch (const DomainError& e) {
    r.notes.push_back(std::string("no unique stationary state (") + e.what() + "); Spohn columns are nan");
  }

  Tracker identity("entropy_rate_identity", 0.0);
  Tracker decomposition("generator_decomposition", 1e-10);
  Tracker delta_sign("delta_nonnegative", 1e-12);
  Tracker dqfi("delta_from_dqfi", 1e-9);
  Tracker trace("trace_preservation", 1e-9);
  Tracker spohn_sign("spohn_nonnegative", 1e-6);
  double tolerance = std::numeric_limits<double>::infinity();

  for (double t : cfg.time_grid.points()) {
    const DensityMatrix rho = evolve(m, rho0, t);
    const EntropyRateReport e = entropy_rate_report(m, rho, h, t);
    tolerance = std::min(tolerance, e.rate_tolerance);
    identity.add(std::abs(e.rate_fd - (e.delta - e.psi)));
    const CMatrix& x = rho.matrix();
    decomposition.add((apply_l1(m, x) + apply_l2(m, x) + apply_l3(m, x) - apply_lnu(m, x)).norm());
    delta_sign.add(std::max(0.0, -e.delta));
    dqfi.add(std::abs(delta_from_dqfi(m, rho) - e.delta));
    trace.add(std::abs(x.trace().real() - 1.0));
    double pi = kNaN;
    double phi = kNaN;
    if (stationary) {
      const SpohnProduction p = spohn_production(m, rho, *stationary, h);
      pi = p.pi;
      phi = p.phi_dot;
      spohn_sign.add(std::max(0.0, -pi));
    }
    r.rows.push_back({t, e.entropy, e.delta, e.psi, e.rate_fd, pi, phi});
  }
  IdentityResult id = identity.result();
  id.tolerance = tolerance;
  r.identities.push_back(id);
  for (const Tracker* tr : {&decomposition, &delta_sign, &dqfi, &trace}) r.identities.push_back(tr->result());
  if (stationary) {
    r.identities.push_back(spohn_sign.result());
    const SpohnProduction p = spohn_production(m, *stationary, *stationary, h);
    r.identities.push_back({"spohn_balance_at_stationary", std::abs(p.pi - p.phi_dot), 1e-6});
  }
}

void run_ou(const ScenarioConfig& cfg, double h, std::uint64_t seed, RunReport& r) {
  const OuModel m(cfg.ou.drift, cfg.ou.noise, cfg.ou.offset);
  const GaussianDensity g0(cfg.gaussian_initial.mean, cfg.gaussian_initial.covariance);
  r.columns = {"t", "h", "diffusion_term", "drift_term", "rate_fd"};

  Tracker rate_fd("debruijn_rate_fd", 1e-6);
  Tracker langevin("langevin_decomposition", 1e-12);
  Tracker heat("heat_closed_form", 1e-9);
  const bool pure_diffusion = m.drift().cwiseAbs().maxCoeff() == 0.0 && m.offset().cwiseAbs().maxCoeff() == 0.0;
  const auto entropy = [&](double t) { return differential_entropy(evolve_density(m, g0, t)); };

  for (double t : cfg.time_grid.points()) {
    const GaussianDensity g = evolve_density(m, g0, t);
    const ClassicalRates c = debruijn_rate(m, g);
    const double fd = five_point(entropy, t, h);
    rate_fd.add(std::abs(fd - c.rate));
    double half = 0.0;
    for (double term : langevin_fisher_decomposition(m, g)) half += 0.5 * term;
    langevin.add(std::abs(half - c.diffusion_term));
    if (pure_diffusion) {
      const RMatrix cov = g0.covariance() + m.diffusion() * t;
      heat.add(std::abs(c.rate - 0.5 * (m.diffusion() * cov.inverse()).trace()));
    }
    r.rows.push_back({t, differential_entropy(g), c.diffusion_term, c.drift_term, fd});
  }
  r.identities.push_back(rate_fd.result());
  r.identities.push_back(langevin.result());
  if (pure_diffusion) r.identities.push_back(heat.result());

  if (cfg.ou.mc_paths > 0) {
    const double t_end = cfg.time_grid.t_end;
    const GaussianDensity analytic = evolve_density(m, g0, t_end);
    const RMatrix paths = simulate_sde(m, gaussian_sampler(g0), t_end, cfg.ou.mc_step, cfg.ou.mc_paths, seed, &g0);
    const MomentComparison cmp = compare_moments(paths, analytic);
    r.identities.push_back({"monte_carlo_moments_z", std::max(cmp.max_mean_z, cmp.max_covariance_z), 5.0});
    const DriftFluxReport flux = drift_flux(m, analytic, std::max<Index>(10000, cfg.ou.mc_paths), seed);
    r.identities.push_back({"drift_flux_score_z", flux.max_z, 5.0});
  }
}

void run_cross(const ScenarioConfig& cfg, Index cutoff, std::uint64_t seed, RunReport& r) {
  const GdsModel m = make_gds(cfg);
  const GaussianState s0 = make_gaussian_initial(cfg, m);
  const FockTruncation tr{cfg.gds.n_modes, cutoff, cfg.hbar};
  CrossValidationOptions opts;
  opts.seed = seed;
  r.columns = {"t", "delta_gaussian", "psi_gaussian", "delta_lindblad", "psi_lindblad", "tail_mass", "discrepancy"};

  // Per identity, keep the grid point with the largest error / tolerance.
  std::vector<IdentityResult> worst;
  const auto record = [&worst](const IdentityResult& c) {
    for (IdentityResult& w : worst) {
      if (w.name != c.name) continue;
      const double ratio = c.tolerance > 0 ? c.max_error / c.tolerance : c.max_error;
      const double old = w.tolerance > 0 ? w.max_error / w.tolerance : w.max_error;
      if (ratio > old) w = c;
      return;
    }
    worst.push_back(c);
  };

  for (double t : cfg.time_grid.points()) {
    const GaussianState s = evolve_moments(m, s0, t);
    const CrossValidationReport rep = cross_validate_rates(m, s, tr, opts);
    for (const IdentityCheck& c : rep.checks) record({c.name, c.error, c.tolerance});
    record({"rate_agreement", rep.rate_discrepancy(), std::max(1e-5, rep.eps_trunc)});
    r.rows.push_back({t, rep.delta_gaussian, rep.psi_gaussian, rep.delta_lindblad, rep.psi_lindblad, rep.tail_mass,
                      rep.rate_discrepancy()});
  }
  r.identities = worst;

  const FockTruncation doubled{cfg.gds.n_modes, 2 * cutoff, cfg.hbar};
  if (static_cast<double>(std::pow(2.0 * cutoff, cfg.gds.n_modes)) <= 256.0) {
    CrossValidationOptions loose = opts;
    loose.tail_tolerance = -1.0;
    const double base = cross_validate_rates(m, s0, tr, loose).rate_discrepancy();
    const double fine = cross_validate_rates(m, s0, doubled, loose).rate_discrepancy();
    // Non-increasing down to a roundoff floor.
    r.identities.push_back({"cutoff_doubling", fine, std::max(base, 1e-9)});
  } else {
    r.notes.push_back(fmt::format("cutoff doubling skipped: dimension {}^{} above 256", 2 * cutoff, cfg.gds.n_modes));
  }
}

}  // namespace

bool RunReport::passed() const {
  return std::all_of(identities.begin(), identities.end(), [](const IdentityResult& i) { return i.passed(); });
}

RunReport run_scenario(const ScenarioConfig& cfg, const RunOverrides& overrides) {
  RunReport r;
  r.scenario = cfg.name;
  r.kind = cfg.kind;
  r.version = kVersion;
  r.seed = overrides.seed.value_or(cfg.seed);
  const std::optional<double> fd = overrides.fd_step ? overrides.fd_step : cfg.fd_step;
  switch (cfg.kind) {
    case ScenarioKind::Gds:
      run_gds(cfg, fd.value_or(kDefaultFlowStep), r);
      break;
    case ScenarioKind::FiniteLindblad:
      run_finite(cfg, fd, r);
      break;
    case ScenarioKind::ClassicalOu:
      run_ou(cfg, fd.value_or(kDefaultFlowStep), r.seed, r);
      break;
    case ScenarioKind::CrossValidate:
      run_cross(cfg, overrides.cutoff.value_or(cfg.cutoff), r.seed, r);
      break;
  }
  return r;
}

std::string format_csv(const RunReport& r) {
  std::string out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    if (i > 0) out += ',';
    out += r.columns[i];
  }
  out += '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += fmt::format("{:.17g}", row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string format_text(const RunReport& r) {
  std::string out;
  out += fmt::format("scenario: {}\nkind: {}\nversion: {}\nseed: {}\nrows: {}\n", r.scenario, to_string(r.kind),
                     r.version, r.seed, r.rows.size());
  for (const IdentityResult& i : r.identities) {
    out += fmt::format("{} {} max_error={:.6g} tolerance={:.6g}\n", i.passed() ? "PASS" : "FAIL", i.name, i.max_error,
                       i.tolerance);
  }
  for (const std::string& n : r.notes) out += "note: " + n + "\n";
  out += fmt::format("result: {}\n", r.passed() ? "PASS" : "FAIL");
  return out;
}

void emit_report(const RunReport& r, const std::filesystem::path& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
  };
  write(dir / (stem + ".csv"), format_csv(r));
  write(dir / (stem + ".txt"), format_text(r));
}

}  // namespace qdb::tools
