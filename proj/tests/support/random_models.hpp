#pragma once

// Random instances shared by the unit and acceptance tests.

#include <cmath>
#include <vector>

#include "qdb/classical_ou.hpp"
#include "qdb/errors.hpp"
#include "qdb/gaussian.hpp"
#include "qdb/lindblad.hpp"
#include "qdb/rng.hpp"

namespace qdb::testing {

inline CMatrix random_complex(Index rows, Index cols, NormalRng& rng, double scale = 1.0) {
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = scale * Complex(rng.normal(), rng.normal());
  }
  return m;
}

inline HermitianMatrix random_hermitian(Index d, NormalRng& rng, double scale = 1.0) {
  const CMatrix g = random_complex(d, d, rng, scale);
  return HermitianMatrix(0.5 * (g + g.adjoint()));
}

/// Full-rank state: Wishart draw mixed with `floor` times the identity.
inline DensityMatrix random_density(Index d, NormalRng& rng, double floor = 0.02) {
  const CMatrix g = random_complex(d, d, rng);
  CMatrix w = g * g.adjoint();
  w /= w.trace().real();
  const CMatrix rho = (1.0 - floor * d) * w + floor * CMatrix::Identity(d, d);
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

inline LindbladModel random_lindblad_model(Index d, Index k, NormalRng& rng, double hbar = 1.0,
                                           double scale = 0.5) {
  std::vector<CMatrix> ls;
  for (Index i = 0; i < k; ++i) ls.push_back(random_complex(d, d, rng, scale));
  return LindbladModel(random_hermitian(d, rng, scale), std::move(ls), hbar);
}

inline RMatrix random_real(Index rows, Index cols, NormalRng& rng, double scale = 1.0) {
  RMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  }
  return m;
}

/// exp(J H) with H symmetric is symplectic.
inline RMatrix random_symplectic(Index n, NormalRng& rng, double scale = 0.3) {
  const RMatrix g = random_real(2 * n, 2 * n, rng, scale);
  const RMatrix h = 0.5 * (g + g.transpose());
  const CMatrix e = matrix_exp(CMatrix((symplectic_form(n) * h).cast<Complex>()));
  return e.real();
}

/// V = S diag(nu, nu) S^T with nu_j in [nu_lo, nu_hi].
inline GaussianState random_gaussian_state(Index n, NormalRng& rng, double nu_lo = 0.7,
                                           double nu_hi = 2.0) {
  RVector nu(2 * n);
  for (Index k = 0; k < n; ++k) {
    nu(k) = nu(n + k) = nu_lo + (nu_hi - nu_lo) * rng.uniform();
  }
  const RMatrix s = random_symplectic(n, rng);
  const RMatrix v = s * nu.asDiagonal() * s.transpose();
  return GaussianState(random_real(2 * n, 1, rng, 0.5).col(0), 0.5 * (v + v.transpose()));
}

/// Random GDS with asymptotically stable drift (rejection sampling).
inline GdsModel random_stable_gds(Index n, NormalRng& rng, double hbar = 1.0, Index k = 0) {
  const Index dim = 2 * n;
  if (k == 0) k = dim;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const RMatrix g = random_real(dim, dim, rng, 0.6);
    const RMatrix b = g * g.transpose();
    std::vector<CVector> ls;
    for (Index i = 0; i < k; ++i) ls.push_back(random_complex(dim, 1, rng, 0.6).col(0));
    const RVector xi = random_real(dim, 1, rng, 0.3).col(0);
    GdsModel m(n, hbar, b, xi, ls);
    if (spectral_abscissa(m.drift()) < -0.05) return m;
  }
  throw Error("random_stable_gds: no stable draw");
}

inline OuModel random_stable_ou(Index n, Index m, NormalRng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const RMatrix a = random_real(n, n, rng, 0.7) - 0.8 * RMatrix::Identity(n, n);
    if (spectral_abscissa(a) < -0.05) {
      return OuModel(a, random_real(n, m, rng, 0.7), random_real(n, 1, rng, 0.3).col(0));
    }
  }
  throw Error("random_stable_ou: no stable draw");
}

inline GaussianDensity random_density_ou(Index n, NormalRng& rng) {
  const RMatrix g = random_real(n, n, rng, 0.6);
  return GaussianDensity(random_real(n, 1, rng).col(0),
                         g * g.transpose() + 0.3 * RMatrix::Identity(n, n));
}

}  // namespace qdb::testing
