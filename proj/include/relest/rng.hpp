#pragma once

#include <cstdint>

#include "relest/linalg.hpp"

namespace relest {

/// What a stream is used for; part of the stream key so that episodes,
/// sensors and purposes never share random numbers.
enum class Purpose : std::uint64_t {
  ProcessNoise = 1,
  MeasurementNoise = 2,
  TriggerXi = 3,
  InitLocalError = 4,
};

/// splitmix64-based counter RNG. One independent stream per
/// (seed, episode, sensor, purpose); reproducible and platform-independent
/// (no libstdc++ distribution internals involved).
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1); never returns 0 or 1 exactly.
  double next_uniform();

  /// Standard normal via Box-Muller (second draw cached).
  double next_gaussian();

  /// sqrt_cov * g with g i.i.d. standard normal.
  Vector gaussian_vector(const Matrix& sqrt_cov);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t episode,
                         std::uint64_t sensor, Purpose purpose);

}  // namespace relest
