#include "qdb/classical_ou.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "moment_ode.hpp"
#include "qdb/errors.hpp"

namespace qdb {

namespace {

Eigen::LLT<RMatrix> cholesky(const RMatrix& cov, const char* what) {
  Eigen::LLT<RMatrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << what << ": covariance is not positive definite";
    throw DomainError(os.str());
  }
  return llt;
}

void require_matching(const OuModel& m, const GaussianDensity& g, const char* what) {
  if (m.dim() != g.dim()) {
    std::ostringstream os;
    os << what << ": density has dimension " << g.dim() << ", model has " << m.dim();
    throw ValidationError(os.str());
  }
}

}  // namespace

OuModel::OuModel(RMatrix drift, RMatrix noise, RVector offset)
    : a_(std::move(drift)), sigma_(std::move(noise)), xi_(std::move(offset)) {
  const Index n = a_.rows();
  if (n < 1 || a_.cols() != n) throw ValidationError("OuModel: drift must be square and non-empty");
  if (sigma_.rows() != n || sigma_.cols() < 1) {
    std::ostringstream os;
    os << "OuModel: noise is " << sigma_.rows() << "x" << sigma_.cols() << ", expected " << n
       << "xM with M >= 1";
    throw ValidationError(os.str());
  }
  if (xi_.size() != n) throw ValidationError("OuModel: offset length differs from the drift size");
  d_ = sigma_ * sigma_.transpose();
}

GaussianDensity::GaussianDensity(RVector mean, RMatrix covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
  const Index n = mean_.size();
  if (n < 1 || cov_.rows() != n || cov_.cols() != n) {
    throw ValidationError("GaussianDensity: covariance must be N x N with N = mean length >= 1");
  }
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("GaussianDensity: covariance is not symmetric");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(cov_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-12) {
    std::ostringstream os;
    os << "GaussianDensity: covariance is not positive definite (min eigenvalue "
       << es.eigenvalues().minCoeff() << ")";
    throw DomainError(os.str());
  }
}

GaussianDensity evolve_density(const OuModel& m, const GaussianDensity& g, double t) {
  require_matching(m, g, "evolve_density");
  if (!(t >= 0.0)) throw ValidationError("evolve_density: time must be non-negative");
  if (t == 0.0) return g;
  const detail::Moments out =
      detail::integrate_moments(m.drift(), m.diffusion(), m.offset(), {g.mean(), g.covariance()}, t);
  return GaussianDensity(out.mean, out.covariance);
}

RMatrix fisher_matrix(const GaussianDensity& g) {
  const RMatrix inv = cholesky(g.covariance(), "fisher_matrix")
                          .solve(RMatrix::Identity(g.dim(), g.dim()));
  return 0.5 * (inv + inv.transpose());
}

double differential_entropy(const GaussianDensity& g) {
  const auto llt = cholesky(g.covariance(), "differential_entropy");
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return 0.5 * log_det +
         0.5 * static_cast<double>(g.dim()) * std::log(2.0 * std::numbers::pi * std::numbers::e);
}

ClassicalRates debruijn_rate(const OuModel& m, const GaussianDensity& g) {
  require_matching(m, g, "debruijn_rate");
  ClassicalRates r;
  r.diffusion_term = 0.5 * (m.diffusion() * fisher_matrix(g)).trace();
  r.drift_term = m.drift().trace();
  r.rate = r.diffusion_term + r.drift_term;
  return r;
}

std::vector<double> langevin_fisher_decomposition(const OuModel& m, const GaussianDensity& g) {
  require_matching(m, g, "langevin_fisher_decomposition");
  const RMatrix fisher = fisher_matrix(g);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.noise().cols()));
  for (Index c = 0; c < m.noise().cols(); ++c) {
    const RVector col = m.noise().col(c);
    out.push_back(col.dot(fisher * col));
  }
  return out;
}

DriftFluxReport drift_flux(const OuModel& m, const GaussianDensity& g, Index n_samples,
                           std::uint64_t seed) {
  require_matching(m, g, "drift_flux");
  if (n_samples < 10000) throw ValidationError("drift_flux: n_samples must be at least 1e4");
  const Index n = g.dim();
  const auto llt = cholesky(g.covariance(), "drift_flux");
  const RMatrix lower = llt.matrixL();
  const RMatrix fisher = fisher_matrix(g);

  NormalRng rng(seed);
  RMatrix sum = RMatrix::Zero(n, n);
  RMatrix sum_sq = RMatrix::Zero(n, n);
  for (Index s = 0; s < n_samples; ++s) {
    const RVector z = rng.normal_vector(n);
    const RVector x = g.mean() + lower * z;
    const RVector score = -fisher * (x - g.mean());
    const RMatrix outer = x * score.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
  }
  const double count = static_cast<double>(n_samples);
  DriftFluxReport r;
  r.value = m.drift().trace();
  r.score_identity = sum / count;
  const RMatrix variance = (sum_sq / count - r.score_identity.cwiseProduct(r.score_identity)) *
                           (count / (count - 1.0));
  const RMatrix expected = -RMatrix::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double se = std::sqrt(std::max(variance(i, j), 1e-300) / count);
      r.max_z = std::max(r.max_z, std::abs(r.score_identity(i, j) - expected(i, j)) / se);
    }
  }
  return r;
}

InitialSampler gaussian_sampler(const GaussianDensity& g) {
  const RMatrix lower = cholesky(g.covariance(), "gaussian_sampler").matrixL();
  const RVector mean = g.mean();
  return [lower, mean](NormalRng& rng) -> RVector {
    return mean + lower * rng.normal_vector(mean.size());
  };
}

InitialSampler point_sampler(const RVector& x0) {
  return [x0](NormalRng&) -> RVector { return x0; };
}

RMatrix simulate_sde(const OuModel& m, const InitialSampler& x0_sampler, double t, double step,
                     Index n_paths, std::uint64_t seed, const GaussianDensity* reference,
                     unsigned threads) {
  if (!(step > 0.0)) throw ValidationError("simulate_sde: step must be positive");
  if (!(t >= 0.0)) throw ValidationError("simulate_sde: time must be non-negative");
  if (n_paths < 1) throw ValidationError("simulate_sde: need at least one path");
  if (reference != nullptr) require_matching(m, *reference, "simulate_sde");

  const Index n = m.dim();
  const Index mcols = m.noise().cols();
  const long steps = t == 0.0 ? 0 : std::max(1L, static_cast<long>(std::ceil(t / step - 1e-9)));
  const double dt = steps == 0 ? 0.0 : t / static_cast<double>(steps);
  const double sqrt_dt = std::sqrt(dt);
  RMatrix out(n, n_paths);

  const RMatrix a_dt = m.drift() * dt;
  const RVector xi_dt = m.offset() * dt;
  const RMatrix noise = m.noise() * sqrt_dt;
  const auto run = [&](Index begin, Index end) {
    RVector x(n);
    RVector dx(n);
    RVector dw(mcols);
    for (Index p = begin; p < end; ++p) {
      NormalRng rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
      x = x0_sampler(rng);
      if (x.size() != n) throw ValidationError("simulate_sde: sampler returned the wrong length");
      for (long s = 0; s < steps; ++s) {
        for (Index j = 0; j < mcols; ++j) dw(j) = rng.normal();
        dx.noalias() = a_dt * x;
        dx.noalias() += noise * dw;
        x += dx - xi_dt;
      }
      out.col(p) = x;
    }
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<Index>(workers, n_paths));
  if (workers <= 1) {
    run(0, n_paths);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const Index chunk = (n_paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const Index begin = std::min<Index>(n_paths, w * chunk);
      const Index end = std::min<Index>(n_paths, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          run(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  if (!out.allFinite()) {
    std::ostringstream os;
    os << "simulate_sde: paths diverged with step " << dt;
    throw NumericalError(os.str());
  }
  if (reference != nullptr && n_paths > 1) {
    const GaussianDensity analytic = evolve_density(m, *reference, t);
    const RVector mean = out.rowwise().mean();
    const RMatrix centred = out.colwise() - mean;
    const RMatrix cov = centred * centred.transpose() / static_cast<double>(n_paths - 1);
    if (cov.norm() > 10.0 * analytic.covariance().norm() + 1e-12) {
      std::ostringstream os;
      os << "simulate_sde: sample covariance norm " << cov.norm() << " exceeds 10x the analytic "
         << analytic.covariance().norm() << "; step " << dt << " is unstable";
      throw NumericalError(os.str());
    }
  }
  return out;
}

MomentComparison compare_moments(const RMatrix& samples, const GaussianDensity& analytic) {
  const Index n = samples.rows();
  const Index count = samples.cols();
  if (n != analytic.dim()) throw ValidationError("compare_moments: dimension mismatch");
  if (count < 2) throw ValidationError("compare_moments: need at least two samples");
  const double c = static_cast<double>(count);
  MomentComparison r;
  r.sample_mean = samples.rowwise().mean();
  const RMatrix centred = samples.colwise() - r.sample_mean;
  r.sample_covariance = centred * centred.transpose() / (c - 1.0);
  const RMatrix& cov = analytic.covariance();
  for (Index i = 0; i < n; ++i) {
    const double se = std::sqrt(cov(i, i) / c);
    r.max_mean_z = std::max(r.max_mean_z, std::abs(r.sample_mean(i) - analytic.mean()(i)) / se);
    for (Index j = 0; j < n; ++j) {
      // Var of a Gaussian sample covariance entry: (S_ii S_jj + S_ij^2) / n
      const double var = (cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / c;
      r.max_covariance_z =
          std::max(r.max_covariance_z, std::abs(r.sample_covariance(i, j) - cov(i, j)) / std::sqrt(var));
    }
  }
  return r;
}

}  // namespace qdb
