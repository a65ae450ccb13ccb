// Seeded random streams with deterministic substream derivation. Streams are
// keyed by the tuple that identifies a draw, never by draw order, so results
// do not depend on iteration or scheduling order.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "cpss/linalg.hpp"

namespace cpss {

namespace detail {
inline uint64_t mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}
}  // namespace detail

/// Derives a substream seed from a master seed and an identifying tuple.
inline uint64_t substream_key(uint64_t master_seed, std::initializer_list<uint64_t> fields) {
  uint64_t h = detail::mix64(master_seed ^ 0x9e3779b97f4a7c15ULL);
  for (uint64_t f : fields) {
    h = detail::mix64(h ^ (f + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  }
  return h;
}

/// SplitMix64-based stream. Small state, full 64-bit output, reproducible
/// across platforms (float conversions below use only exact operations).
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return detail::mix64(state_);
  }

  /// Uniform double in (0, 1]; never returns 0 so log() stays finite.
  double uniform_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal pair via Box-Muller.
  void normal_pair(double& z0, double& z1) {
    const double u1 = uniform_unit();
    const double u2 = uniform_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 6.283185307179586476925286766559 * u2;
    z0 = r * std::cos(phi);
    z1 = r * std::sin(phi);
  }

  /// Circularly-symmetric complex Gaussian, zero mean, E|z|^2 = 1.
  Complex complex_gaussian_unit() {
    double z0 = 0.0, z1 = 0.0;
    normal_pair(z0, z1);
    return Complex(z0 * 0.70710678118654752440, z1 * 0.70710678118654752440);
  }

 private:
  uint64_t state_;
};

}  // namespace cpss
