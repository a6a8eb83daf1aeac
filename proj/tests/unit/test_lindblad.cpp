#include <gtest/gtest.h>

#include <cmath>

#include "qdb/errors.hpp"
#include "qdb/lindblad.hpp"
#include "support/random_models.hpp"

namespace qdb {
namespace {

constexpr Complex kI{0.0, 1.0};

CMatrix sx() { return (CMatrix(2, 2) << 0, 1, 1, 0).finished(); }
CMatrix sy() { return (CMatrix(2, 2) << 0, -kI, kI, 0).finished(); }
CMatrix sz() { return (CMatrix(2, 2) << 1, 0, 0, -1).finished(); }
// Index 0 is the excited level.
CMatrix sminus() { return (CMatrix(2, 2) << 0, 0, 1, 0).finished(); }
CMatrix eye2() { return CMatrix::Identity(2, 2); }

LindbladModel dephasing(double gamma, double hbar = 1.0) {
  return LindbladModel(HermitianMatrix::zero(2), {std::sqrt(hbar * gamma) * sz()}, hbar);
}

TEST(LindbladModel, ValidatesShapes) {
  EXPECT_THROW(LindbladModel(HermitianMatrix::zero(2), {CMatrix::Identity(3, 3)}), ValidationError);
  EXPECT_THROW(LindbladModel(HermitianMatrix::zero(2), {}, 0.0), ValidationError);
  const LindbladModel m(HermitianMatrix(sz()), {sminus()});
  EXPECT_THROW(apply_lu(m, CMatrix::Identity(3, 3)), ValidationError);
}

TEST(LindbladModel, CartesianSplitReconstructs) {
  NormalRng rng(1);
  const LindbladModel m = testing::random_lindblad_model(4, 3, rng);
  for (std::size_t k = 0; k < m.num_lindblads(); ++k) {
    const CMatrix back = m.split().a_ops[k].matrix() + kI * m.split().b_ops[k].matrix();
    EXPECT_LT((back - m.lindblads()[k]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ApplyLU, Examples) {
  const LindbladModel m(HermitianMatrix(sz()), {});
  EXPECT_LT(apply_lu(m, sz()).norm(), 1e-15);
  EXPECT_LT((apply_lu(m, sx()) - 2.0 * sy()).norm(), 1e-15);
  const LindbladModel free(HermitianMatrix::zero(2), {});
  EXPECT_EQ(apply_lu(free, sx()).norm(), 0.0);
}

TEST(ApplyLNU, Examples) {
  const LindbladModel none(HermitianMatrix(sz()), {});
  EXPECT_EQ(apply_lnu(none, sx()).norm(), 0.0);
  const LindbladModel deph(HermitianMatrix::zero(2), {sz()});
  EXPECT_LT(apply_lnu(deph, 0.5 * eye2()).norm(), 1e-15);
  const LindbladModel decay(HermitianMatrix::zero(2), {sminus()});
  const CMatrix excited = (CMatrix(2, 2) << 1, 0, 0, 0).finished();
  const CMatrix expected = (CMatrix(2, 2) << -1, 0, 0, 1).finished();
  EXPECT_LT((apply_lnu(decay, excited) - expected).norm(), 1e-15);
}

TEST(Decomposition, HermitianLindbladHasNoL2L3) {
  NormalRng rng(2);
  const LindbladModel m(HermitianMatrix::zero(3), {testing::random_hermitian(3, rng).matrix()});
  const CMatrix o = testing::random_complex(3, 3, rng);
  EXPECT_LT(apply_l2(m, o).norm(), 1e-13);
  EXPECT_LT(apply_l3(m, o).norm(), 1e-13);
  EXPECT_LT((apply_l1(m, o) - apply_lnu(m, o)).norm(), 1e-12);
}

TEST(Decomposition, UnitOperator) {
  NormalRng rng(3);
  const double hbar = 0.8;
  const LindbladModel m = testing::random_lindblad_model(3, 2, rng, hbar);
  const CMatrix one = CMatrix::Identity(3, 3);
  const CMatrix c = m.commutator_sum() / (2.0 * hbar);
  EXPECT_LT(apply_l1(m, one).norm(), 1e-13);
  EXPECT_LT((apply_l2(m, one) - c).norm(), 1e-13);
  EXPECT_LT((apply_l3(m, one) - c).norm(), 1e-13);
  EXPECT_LT((adjoint_apply(Generator::L2, m, one) + adjoint_apply(Generator::L3, m, one)).norm(),
            1e-13);
  EXPECT_LT(adjoint_apply(Generator::L1, m, one).norm(), 1e-13);
}

TEST(Decomposition, AmplitudeDampingOnMaximallyMixed) {
  const LindbladModel m(HermitianMatrix::zero(2), {sminus()});
  const CMatrix half = 0.5 * eye2();
  // [s-, s+] = diag(-1, 1), so L2[1/2] = (1/4) {diag(-1,1), 1/2} = diag(-1/4, 1/4)
  const CMatrix expected = (CMatrix(2, 2) << -0.25, 0, 0, 0.25).finished();
  EXPECT_LT((apply_l2(m, half) - expected).norm(), 1e-15);
  EXPECT_LT((apply_l1(m, half) + apply_l2(m, half) + apply_l3(m, half) - apply_lnu(m, half)).norm(),
            1e-15);
}

TEST(Decomposition, SumsToNonUnitaryOnRandomModels) {
  NormalRng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 2 + trial % 7;
    const LindbladModel m = testing::random_lindblad_model(d, 1 + trial % 3, rng, 0.5 + rng.uniform());
    const CMatrix o = testing::random_complex(d, d, rng);
    const CMatrix sum = apply_l1(m, o) + apply_l2(m, o) + apply_l3(m, o);
    EXPECT_LE((sum - apply_lnu(m, o)).norm(), 1e-10);
    EXPECT_LE((apply(Generator::NonUnitary, m, o) - apply_lnu(m, o)).norm(), 1e-12);
  }
}

TEST(Decomposition, TracePreservation) {
  NormalRng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 2 + trial % 5;
    const LindbladModel m = testing::random_lindblad_model(d, 2, rng);
    const DensityMatrix rho = testing::random_density(d, rng);
    EXPECT_LE(std::abs(apply(Generator::Total, m, rho.matrix()).trace()), 1e-12);
  }
}

TEST(Adjointness, AllGenerators) {
  NormalRng rng(6);
  const Generator all[] = {Generator::Unitary, Generator::NonUnitary, Generator::L1,
                           Generator::L2,      Generator::L3,         Generator::Total};
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 2 + trial % 4;
    const LindbladModel m = testing::random_lindblad_model(d, 2, rng, 0.7);
    const CMatrix a = testing::random_complex(d, d, rng);
    const CMatrix b = testing::random_complex(d, d, rng);
    for (Generator g : all) {
      const Complex lhs = hs_inner(apply(g, m, a), b);
      const Complex rhs = hs_inner(a, adjoint_apply(g, m, b));
      EXPECT_LT(std::abs(lhs - rhs), 1e-10) << to_string(g);
    }
    EXPECT_LT(std::abs(hs_inner(apply_l1(m, a), b) - hs_inner(a, apply_l1(m, b))), 1e-10);
    EXPECT_LT(std::abs(hs_inner(apply_l2(m, a), b) - hs_inner(a, apply_l2(m, b))), 1e-10);
    EXPECT_LT(std::abs(hs_inner(apply_l3(m, a), b) + hs_inner(a, apply_l3(m, b))), 1e-10);
  }
}

TEST(Superoperator, MatchesDirectApplication) {
  NormalRng rng(7);
  const LindbladModel m = testing::random_lindblad_model(3, 2, rng, 1.3);
  const CMatrix o = testing::random_complex(3, 3, rng);
  const Generator all[] = {Generator::Unitary, Generator::NonUnitary, Generator::L1,
                           Generator::L2,      Generator::L3,         Generator::Total};
  for (Generator g : all) {
    EXPECT_LT((unvec(superoperator(m, g) * vec(o), 3) - apply(g, m, o)).norm(), 1e-12) << to_string(g);
  }
}

TEST(Gauge, ZeroShiftIsIdentity) {
  NormalRng rng(8);
  const LindbladModel m = testing::random_lindblad_model(3, 2, rng);
  const std::vector<Complex> zero(2, 0.0);
  const LindbladModel g = gauge_transform(m, zero);
  EXPECT_LT((g.hamiltonian().matrix() - m.hamiltonian().matrix()).norm(), 1e-15);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ((g.lindblads()[k] - m.lindblads()[k]).norm(), 0.0);
  EXPECT_THROW(gauge_transform(m, std::vector<Complex>(3, 0.0)), ValidationError);
}

TEST(Gauge, GeneratorInvariantQubitDecay) {
  NormalRng rng(9);
  const LindbladModel m(HermitianMatrix(sz()), {sminus()});
  const std::vector<Complex> alpha{1.0};
  const LindbladModel g = gauge_transform(m, alpha);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix rho = testing::random_density(2, rng).matrix();
    EXPECT_LT((apply(Generator::Total, g, rho) - apply(Generator::Total, m, rho)).norm(), 1e-10);
  }
}

TEST(Gauge, PiecesTransformAsExpected) {
  NormalRng rng(10);
  for (double hbar : {1.0, 0.37, 2.5}) {
    const LindbladModel m = testing::random_lindblad_model(3, 2, rng, hbar);
    const std::vector<Complex> alpha{Complex(0.4, -0.7), Complex(-1.1, 0.2)};
    const LindbladModel g = gauge_transform(m, alpha);
    const HermitianMatrix shift = gauge_hamiltonian_shift(m, alpha);
    const LindbladModel shift_model(shift, {}, hbar);
    for (int trial = 0; trial < 5; ++trial) {
      const CMatrix o = testing::random_complex(3, 3, rng);
      EXPECT_LT((apply(Generator::Total, g, o) - apply(Generator::Total, m, o)).norm(), 1e-10);
      EXPECT_LT((apply_l1(g, o) - apply_l1(m, o)).norm(), 1e-10);
      EXPECT_LT((apply_l2(g, o) - apply_l2(m, o)).norm(), 1e-10);
      EXPECT_LT((apply_l3(g, o) - apply_l3(m, o) + apply_lu(shift_model, o)).norm(), 1e-10);
    }
  }
}

TEST(Gauge, DeltaPsiInvariant) {
  NormalRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 2 + trial % 3;
    const LindbladModel m = testing::random_lindblad_model(d, 2, rng);
    std::vector<Complex> alpha{Complex(rng.normal(), rng.normal()), Complex(rng.normal(), rng.normal())};
    const LindbladModel g = gauge_transform(m, alpha);
    const DensityMatrix rho = testing::random_density(d, rng);
    const CMatrix lr = matrix_log_psd(rho).matrix();
    const FluctuationDissipation a = fluctuation_dissipation_terms(m, rho.matrix(), lr);
    const FluctuationDissipation b = fluctuation_dissipation_terms(g, rho.matrix(), lr);
    EXPECT_NEAR(a.delta, b.delta, 1e-8);
    EXPECT_NEAR(a.psi, b.psi, 1e-8);
  }
}

TEST(Evolve, ZeroTimeAndNegativeTime) {
  const LindbladModel m(HermitianMatrix(sz()), {sminus()});
  NormalRng rng(12);
  const DensityMatrix rho = testing::random_density(2, rng);
  EXPECT_EQ((evolve(m, rho, 0.0).matrix() - rho.matrix()).norm(), 0.0);
  EXPECT_THROW(evolve(m, rho, -1.0), ValidationError);
}

TEST(Evolve, UnitaryConjugation) {
  const double hbar = 0.6;
  const double t = 1.7;
  const LindbladModel m(HermitianMatrix(sz()), {}, hbar);
  NormalRng rng(13);
  const DensityMatrix rho = testing::random_density(2, rng);
  const CMatrix u = matrix_exp(HermitianMatrix(sz()), Complex(0.0, -t / hbar));
  const DensityMatrix out = evolve(m, rho, t);
  EXPECT_LT((out.matrix() - u * rho.matrix() * u.adjoint()).norm(), 1e-12);
  EXPECT_NEAR(von_neumann_entropy(out), von_neumann_entropy(rho), 1e-12);
}

TEST(Evolve, DephasingCoherenceDecay) {
  const double gamma = 0.8;
  const double hbar = 1.5;
  const LindbladModel m = dephasing(gamma, hbar);
  const DensityMatrix rho((CMatrix(2, 2) << 0.6, Complex(0.2, 0.1), Complex(0.2, -0.1), 0.4).finished());
  for (double t : {0.1, 0.5, 2.0}) {
    const CMatrix r = evolve(m, rho, t).matrix();
    EXPECT_NEAR(std::abs(r(0, 1) - rho.matrix()(0, 1) * std::exp(-2.0 * gamma * t)), 0.0, 1e-12);
    EXPECT_NEAR(r(0, 0).real(), 0.6, 1e-12);
  }
}

TEST(Evolve, FrozenReferenceState) {
  // Independent reference: tests/oracles/gen_oracles.py (finite.rho_t07).
  const LindbladModel m(
      HermitianMatrix((CMatrix(2, 2) << 1.0, Complex(0.3, -0.2), Complex(0.3, 0.2), -0.5).finished()),
      {(CMatrix(2, 2) << 0.2, 0.5, Complex(0, 0.1), -0.3).finished()});
  const DensityMatrix rho(
      (CMatrix(2, 2) << 0.6, Complex(0.1, 0.15), Complex(0.1, -0.15), 0.4).finished());
  const CMatrix r = evolve(m, rho, 0.7).matrix();
  EXPECT_NEAR(r(0, 0).real(), 0.6025325814346068, 1e-12);
  EXPECT_NEAR(r(0, 1).real(), 0.11754279012293294, 1e-12);
  EXPECT_NEAR(r(0, 1).imag(), 0.026397985736679695, 1e-12);
  const CMatrix rk = evolve(m, rho, 0.7, Rk4{1e-3}).matrix();
  EXPECT_LT((rk - r).norm(), 1e-10);
}

TEST(Evolve, SemigroupAndPositivity) {
  NormalRng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 2 + trial % 4;
    const LindbladModel m = testing::random_lindblad_model(d, 2, rng);
    const DensityMatrix rho = testing::random_density(d, rng);
    const double t = rng.uniform();
    const double s = rng.uniform();
    const DensityMatrix joint = evolve(m, rho, t + s);
    const DensityMatrix split = evolve(m, evolve(m, rho, t), s);
    EXPECT_LE((joint.matrix() - split.matrix()).norm(), 1e-9);
    EXPECT_NEAR(joint.matrix().trace().real(), 1.0, 1e-9);
  }
}

TEST(Evolve, Rk4StepTooLargeIsReported) {
  NormalRng rng(15);
  const LindbladModel m = testing::random_lindblad_model(3, 2, rng, 1.0, 3.0);
  const DensityMatrix rho = testing::random_density(3, rng);
  EXPECT_THROW(evolve(m, rho, 50.0, Rk4{5.0}), NumericalError);
}

TEST(Evolve, LargeDimensionUsesRk4) {
  NormalRng rng(16);
  const LindbladModel m = testing::random_lindblad_model(17, 1, rng, 1.0, 0.2);
  const DensityMatrix rho = testing::random_density(17, rng);
  const DensityMatrix a = evolve(m, rho, 0.3);
  const DensityMatrix b = evolve(m, rho, 0.3, SuperoperatorExp{});
  EXPECT_LT((a.matrix() - b.matrix()).norm(), 1e-9);
}

TEST(EntropyRate, UnitaryOnly) {
  NormalRng rng(17);
  const LindbladModel m(testing::random_hermitian(3, rng), {});
  const DensityMatrix rho = testing::random_density(3, rng);
  const EntropyRateReport r = entropy_rate_report(m, rho, default_fd_step(m));
  EXPECT_EQ(r.delta, 0.0);
  EXPECT_EQ(r.psi, 0.0);
  EXPECT_LE(std::abs(r.rate_fd), r.rate_tolerance);
}

TEST(EntropyRate, DephasingClosedForm) {
  const double c = 0.25;
  const DensityMatrix rho(0.5 * eye2() + c * sx());
  for (double hbar : {1.0, 0.3}) {
    const LindbladModel m = dephasing(1.0, hbar);
    const EntropyRateReport r = entropy_rate_report(m, rho, default_fd_step(m));
    const double closed = 2.0 * c * std::log((1.0 + 2.0 * c) / (1.0 - 2.0 * c));
    EXPECT_NEAR(closed, 0.5 * std::log(3.0), 1e-15);
    EXPECT_NEAR(r.delta, closed, 1e-10);
    EXPECT_NEAR(r.psi, 0.0, 1e-14);
    EXPECT_NEAR(r.rate_fd, closed, 1e-6);
  }
}

TEST(EntropyRate, DiagonalStateUnderDephasing) {
  const LindbladModel m(HermitianMatrix::zero(2), {sz()});
  const DensityMatrix rho((CMatrix(2, 2) << 0.7, 0, 0, 0.3).finished());
  const EntropyRateReport r = entropy_rate_report(m, rho, default_fd_step(m));
  EXPECT_NEAR(r.delta, 0.0, 1e-15);
  EXPECT_NEAR(r.psi, 0.0, 1e-15);
  EXPECT_NEAR(r.rate_fd, 0.0, 1e-10);
}

TEST(EntropyRate, FrozenReferenceCase) {
  // Independent reference: tests/oracles/gen_oracles.py (finite.*).
  const LindbladModel m(
      HermitianMatrix((CMatrix(2, 2) << 1.0, Complex(0.3, -0.2), Complex(0.3, 0.2), -0.5).finished()),
      {(CMatrix(2, 2) << 0.2, 0.5, Complex(0, 0.1), -0.3).finished()});
  const DensityMatrix rho(
      (CMatrix(2, 2) << 0.6, Complex(0.1, 0.15), Complex(0.1, -0.15), 0.4).finished());
  const EntropyRateReport r = entropy_rate_report(m, rho, default_fd_step(m));
  EXPECT_NEAR(r.delta, 0.04524156030586734, 1e-12);
  EXPECT_NEAR(r.psi, -0.01807535899411864, 1e-12);
  EXPECT_NEAR(r.rate_fd, 0.0633169192999859, 1e-7);
}

TEST(EntropyRate, RejectsSingularStates) {
  const LindbladModel m = dephasing(1.0);
  const DensityMatrix pure((CMatrix(2, 2) << 1, 0, 0, 0).finished());
  EXPECT_THROW(entropy_rate_report(m, pure, 1e-4), DomainError);
  EXPECT_THROW(entropy_rate_report(m, DensityMatrix::maximally_mixed(2), 0.0), ValidationError);
}

TEST(EntropyRate, IdentityAndNonNegativeDeltaOnRandomCases) {
  NormalRng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 2 + trial % 2;
    const LindbladModel m = testing::random_lindblad_model(d, 2, rng);
    const DensityMatrix rho = testing::random_density(d, rng);
    const EntropyRateReport r = entropy_rate_report(m, rho, default_fd_step(m));
    EXPECT_GE(r.delta, -1e-9);
    EXPECT_LE(std::abs(r.rate_fd - (r.delta - r.psi)), r.rate_tolerance);
  }
}

TEST(Stationary, AmplitudeDampingGroundState) {
  const LindbladModel m(HermitianMatrix(sz()), {0.7 * sminus()});
  const DensityMatrix s = stationary_state(m);
  EXPECT_NEAR(s.matrix()(1, 1).real(), 1.0, 1e-12);
}

TEST(Stationary, DegenerateNullSpaceIsAnError) {
  const LindbladModel m(HermitianMatrix(sz()), {});
  EXPECT_THROW(stationary_state(m), DomainError);
}

TEST(Spohn, AtStationaryState) {
  NormalRng rng(19);
  const LindbladModel m = testing::random_lindblad_model(3, 2, rng);
  const DensityMatrix s = stationary_state(m);
  const SpohnProduction p = spohn_production(m, s, s, default_fd_step(m));
  EXPECT_NEAR(p.pi, 0.0, 1e-6);
  EXPECT_NEAR(p.phi_dot, 0.0, 1e-6);
}

TEST(Spohn, UnitaryWithMaximallyMixedReference) {
  NormalRng rng(20);
  const LindbladModel m(testing::random_hermitian(3, rng), {});
  const DensityMatrix rho = testing::random_density(3, rng);
  const SpohnProduction p = spohn_production(m, rho, DensityMatrix::maximally_mixed(3), 1e-4);
  EXPECT_NEAR(p.pi, 0.0, 1e-8);
}

TEST(Spohn, AmplitudeDampingProducesEntropy) {
  const double gamma = 0.9;
  // a small thermal admixture keeps the stationary state full rank
  const LindbladModel m(HermitianMatrix(sz()), {std::sqrt(gamma) * sminus(),
                                                std::sqrt(0.1 * gamma) * CMatrix(sminus().adjoint())});
  const DensityMatrix s = stationary_state(m);
  const DensityMatrix rho((CMatrix(2, 2) << 0.8, Complex(0.1, 0.05), Complex(0.1, -0.05), 0.2).finished());
  const SpohnProduction p = spohn_production(m, rho, s, default_fd_step(m));
  EXPECT_GT(p.pi, 0.0);
}

TEST(Spohn, NonStationaryReferenceIsAnError) {
  const LindbladModel m(HermitianMatrix::zero(2), {sminus(), 0.5 * CMatrix(sminus().adjoint())});
  const DensityMatrix rho = DensityMatrix::maximally_mixed(2);
  try {
    spohn_production(m, rho, rho, 1e-4);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("||L[rho_s]||"), std::string::npos);
  }
}

}  // namespace
}  // namespace qdb
