#include "relest/rng.hpp"

#include <cmath>

namespace relest {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t episode,
                         std::uint64_t sensor, Purpose purpose) {
  // hash-combine the coordinates so distinct tuples give distinct streams
  std::uint64_t s = seed;
  std::uint64_t k = splitmix64(s);
  s ^= episode + 0x9E3779B97F4A7C15ULL + (k << 6) + (k >> 2);
  k = splitmix64(s);
  s ^= sensor + 0x9E3779B97F4A7C15ULL + (k << 6) + (k >> 2);
  k = splitmix64(s);
  s ^= static_cast<std::uint64_t>(purpose) + 0x9E3779B97F4A7C15ULL + (k << 6) +
       (k >> 2);
  return splitmix64(s);
}

std::uint64_t RngStream::next_u64() { return splitmix64(state_); }

double RngStream::next_uniform() {
  // 53-bit mantissa, shifted to the open interval (0,1)
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = next_uniform();
  double u2 = next_uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Vector RngStream::gaussian_vector(const Matrix& sqrt_cov) {
  Vector g(sqrt_cov.cols());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = next_gaussian();
  return sqrt_cov * g;
}

}  // namespace relest
