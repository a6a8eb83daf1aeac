#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qdb/matrix_kernel.hpp"
#include "qdb/rng.hpp"

namespace qdb {

/// dX = (A X - xi) dt + Sigma dW, with D = Sigma Sigma^T.
class OuModel {
 public:
  OuModel(RMatrix drift, RMatrix noise, RVector offset);

  Index dim() const { return a_.rows(); }
  const RMatrix& drift() const { return a_; }
  const RMatrix& noise() const { return sigma_; }
  const RVector& offset() const { return xi_; }
  const RMatrix& diffusion() const { return d_; }

 private:
  RMatrix a_;
  RMatrix sigma_;
  RVector xi_;
  RMatrix d_;
};

class GaussianDensity {
 public:
  GaussianDensity(RVector mean, RMatrix covariance);

  Index dim() const { return mean_.size(); }
  const RVector& mean() const { return mean_; }
  const RMatrix& covariance() const { return cov_; }

 private:
  RVector mean_;
  RMatrix cov_;
};

/// Gaussian solution of the Fokker-Planck equation at time t.
GaussianDensity evolve_density(const OuModel& m, const GaussianDensity& g, double t);

/// covariance^{-1}
RMatrix fisher_matrix(const GaussianDensity& g);

/// (1/2) ln det covariance + (N/2) ln(2 pi e)
double differential_entropy(const GaussianDensity& g);

struct ClassicalRates {
  double rate = 0.0;
  double diffusion_term = 0.0;  ///< (1/2) tr(D J)
  double drift_term = 0.0;      ///< tr(A)
};

ClassicalRates debruijn_rate(const OuModel& m, const GaussianDensity& g);

/// Sigma_m^T J Sigma_m for every column of the noise matrix.
std::vector<double> langevin_fisher_decomposition(const OuModel& m, const GaussianDensity& g);

struct DriftFluxReport {
  double value = 0.0;  ///< tr(A), exact
  /// Sample average of x s(x)^T with s the score -cov^{-1}(x - mu); its
  /// expectation is -1.
  RMatrix score_identity;
  /// Largest |entry - expected| / standard error over score_identity.
  double max_z = 0.0;
};

DriftFluxReport drift_flux(const OuModel& m, const GaussianDensity& g, Index n_samples,
                           std::uint64_t seed);

using InitialSampler = std::function<RVector(NormalRng&)>;

/// Draws from g.
InitialSampler gaussian_sampler(const GaussianDensity& g);
/// Always returns x0.
InitialSampler point_sampler(const RVector& x0);

/// Euler-Maruyama paths, one column per path. Path p draws from
/// NormalRng(derive_seed(seed, p)), so the output does not depend on
/// `threads`. When `reference` (the initial density) is given, the sample
/// covariance is checked against its analytic evolution to t.
RMatrix simulate_sde(const OuModel& m, const InitialSampler& x0_sampler, double t, double step,
                     Index n_paths, std::uint64_t seed, const GaussianDensity* reference = nullptr,
                     unsigned threads = 0);

struct MomentComparison {
  RVector sample_mean;
  RMatrix sample_covariance;
  double max_mean_z = 0.0;        ///< in standard errors
  double max_covariance_z = 0.0;  ///< in standard errors
};

/// Sample moments of the columns of `samples` against an analytic density.
/// Standard errors use the Gaussian fourth-moment formula.
MomentComparison compare_moments(const RMatrix& samples, const GaussianDensity& analytic);

}  // namespace qdb
