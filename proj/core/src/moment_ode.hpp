#pragma once

#include "qdb/matrix_kernel.hpp"

namespace qdb::detail {

struct Moments {
  RVector mean;
  RMatrix covariance;
};

/// Integrates dmu/dt = a mu - xi, dV/dt = a V + V a^T + q from 0 to t with
/// RK4, halving the step until two successive solutions agree within
/// tolerance * max(1, ||V||). Throws NumericalError if that never happens.
Moments integrate_moments(const RMatrix& a, const RMatrix& q, const RVector& xi,
                          const Moments& start, double t, double tolerance = 1e-9);

}  // namespace qdb::detail
