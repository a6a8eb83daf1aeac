#include "moment_ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdb/errors.hpp"

namespace qdb::detail {

namespace {

Moments rk4(const RMatrix& a, const RMatrix& q, const RVector& xi, const Moments& start, double t,
            long steps) {
  const double h = t / static_cast<double>(steps);
  const auto dmu = [&](const RVector& mu) -> RVector { return a * mu - xi; };
  const auto dv = [&](const RMatrix& v) -> RMatrix { return a * v + v * a.transpose() + q; };
  RVector mu = start.mean;
  RMatrix v = start.covariance;
  for (long s = 0; s < steps; ++s) {
    const RVector m1 = dmu(mu);
    const RVector m2 = dmu(mu + 0.5 * h * m1);
    const RVector m3 = dmu(mu + 0.5 * h * m2);
    const RVector m4 = dmu(mu + h * m3);
    mu += (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    const RMatrix v1 = dv(v);
    const RMatrix v2 = dv(v + 0.5 * h * v1);
    const RMatrix v3 = dv(v + 0.5 * h * v2);
    const RMatrix v4 = dv(v + h * v3);
    v += (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
  }
  v = 0.5 * (v + v.transpose()).eval();
  return {mu, v};
}

}  // namespace

Moments integrate_moments(const RMatrix& a, const RMatrix& q, const RVector& xi,
                          const Moments& start, double t, double tolerance) {
  if (!(t >= 0.0)) throw ValidationError("moment evolution: time must be non-negative");
  if (t == 0.0) return start;
  const double rate = a.norm() + 1e-12;
  long steps = std::max(8L, static_cast<long>(std::ceil(t * rate / 0.05)));
  Moments coarse = rk4(a, q, xi, start, t, steps);
  constexpr long kMaxSteps = 1L << 24;
  while (steps < kMaxSteps) {
    steps *= 2;
    Moments fine = rk4(a, q, xi, start, t, steps);
    const double scale = std::max(1.0, fine.covariance.norm() + fine.mean.norm());
    const double diff =
        (fine.covariance - coarse.covariance).norm() + (fine.mean - coarse.mean).norm();
    if (!std::isfinite(diff)) break;
    if (diff <= tolerance * scale) return fine;
    coarse = std::move(fine);
  }
  std::ostringstream os;
  os << "moment evolution: RK4 did not reach tolerance " << tolerance << " up to t = " << t;
  throw NumericalError(os.str());
}

}  // namespace qdb::detail
