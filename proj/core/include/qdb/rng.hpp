#pragma once

#include <cstdint>
#include <random>

#include "qdb/matrix_kernel.hpp"

namespace qdb {

/// splitmix64 finalizer applied to (seed, stream); gives independent
/// per-path seeds so results do not depend on how paths are scheduled.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// std::mt19937_64 with an explicit Box-Muller transform. The standard
/// normal_distribution is implementation-defined, so it is not used here:
/// the stream of normals is fixed by the seed on every platform.
class NormalRng {
 public:
  explicit NormalRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();
  RVector normal_vector(Index n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qdb
