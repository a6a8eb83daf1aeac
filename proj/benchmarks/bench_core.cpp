#include <benchmark/benchmark.h>

#include <random>

#include "qdb/classical_ou.hpp"
#include "qdb/dqfi.hpp"
#include "qdb/fock_bridge.hpp"
#include "qdb/gaussian.hpp"
#include "qdb/lindblad.hpp"

using namespace qdb;

namespace {

CMatrix random_matrix(Index d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  CMatrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

DensityMatrix random_density(Index d, unsigned seed) {
  const CMatrix g = random_matrix(d, seed);
  CMatrix rho = g * g.adjoint() + 0.1 * CMatrix::Identity(d, d);
  return DensityMatrix(rho / rho.trace().real(), DensityTolerance{1e-10, 1e-10, 1e-9});
}

LindbladModel random_model(Index d, unsigned seed) {
  const CMatrix h = random_matrix(d, seed);
  return LindbladModel(HermitianMatrix(0.5 * (h + h.adjoint())),
                       {0.3 * random_matrix(d, seed + 1), 0.3 * random_matrix(d, seed + 2)});
}

GdsModel damped_modes(Index n) {
  const double down = std::sqrt(0.3);
  const double up = std::sqrt(0.1);
  std::vector<CVector> ls;
  for (Index k = 0; k < n; ++k) {
    CVector a = CVector::Zero(2 * n);
    CVector b = CVector::Zero(2 * n);
    a(k) = Complex(0.0, down);
    a(n + k) = -down;
    b(k) = Complex(0.0, -up);
    b(n + k) = -up;
    ls.push_back(a);
    ls.push_back(b);
  }
  RMatrix bm = RMatrix::Identity(2 * n, 2 * n);
  if (n > 1) bm(0, 1) = bm(1, 0) = 0.2;
  return GdsModel(n, 1.0, bm, RVector::Zero(2 * n), ls);
}

}  // namespace

static void BM_MatrixLog(benchmark::State& state) {
  const DensityMatrix rho = random_density(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(matrix_log_psd(rho));
}
BENCHMARK(BM_MatrixLog)->Arg(2)->Arg(8)->Arg(32);

static void BM_Evolve(benchmark::State& state) {
  const Index d = state.range(0);
  const LindbladModel m = random_model(d, 3);
  const DensityMatrix rho = random_density(d, 4);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(m, rho, 0.5));
}
BENCHMARK(BM_Evolve)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void BM_EntropyRateReport(benchmark::State& state) {
  const Index d = state.range(0);
  const LindbladModel m = random_model(d, 5);
  const DensityMatrix rho = random_density(d, 6);
  const double h = default_fd_step(m);
  for (auto _ : state) benchmark::DoNotOptimize(entropy_rate_report(m, rho, h));
}
BENCHMARK(BM_EntropyRateReport)->Arg(2)->Arg(8);

static void BM_DeltaFromDqfi(benchmark::State& state) {
  const Index d = state.range(0);
  const LindbladModel m = random_model(d, 7);
  const DensityMatrix rho = random_density(d, 8);
  for (auto _ : state) benchmark::DoNotOptimize(delta_from_dqfi(m, rho));
}
BENCHMARK(BM_DeltaFromDqfi)->Arg(2)->Arg(8)->Arg(16);

static void BM_QuantumDebruijnRate(benchmark::State& state) {
  const GdsModel m = damped_modes(state.range(0));
  const GaussianState s = GaussianState::thermal(state.range(0), 1.2);
  for (auto _ : state) benchmark::DoNotOptimize(quantum_debruijn_rate(m, s));
}
BENCHMARK(BM_QuantumDebruijnRate)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

static void BM_StationaryCovariance(benchmark::State& state) {
  const GdsModel m = damped_modes(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(stationary_covariance(m));
}
BENCHMARK(BM_StationaryCovariance)->Arg(1)->Arg(4)->Arg(8);

static void BM_EvolveMoments(benchmark::State& state) {
  const GdsModel m = damped_modes(state.range(0));
  const GaussianState s = GaussianState::thermal(state.range(0), 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_moments(m, s, 2.0));
}
BENCHMARK(BM_EvolveMoments)->Arg(1)->Arg(4);

static void BM_LiftState(benchmark::State& state) {
  const FockTruncation tr{1, state.range(0), 1.0};
  const GaussianState s = GaussianState::thermal(1, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(lift_state(s, tr));
}
BENCHMARK(BM_LiftState)->Arg(20)->Arg(40)->Arg(80);

static void BM_CrossValidate(benchmark::State& state) {
  const GdsModel m = damped_modes(1);
  const GaussianState s = GaussianState::thermal(1, 1.0);
  const FockTruncation tr{1, state.range(0), 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(cross_validate_rates(m, s, tr));
}
BENCHMARK(BM_CrossValidate)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_SimulateSde(benchmark::State& state) {
  RMatrix a(2, 2);
  a << -0.8, 1.3, -1.3, -0.8;
  const OuModel m(a, RMatrix::Identity(2, 2), RVector::Zero(2));
  const GaussianDensity g(RVector::Zero(2), RMatrix::Identity(2, 2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_sde(m, gaussian_sampler(g), 1.0, 1e-3, state.range(0), 1, nullptr, 1));
  }
}
BENCHMARK(BM_SimulateSde)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
