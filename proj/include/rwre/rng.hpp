#pragma once

#include <cmath>
#include <cstdint>

namespace rwre {

// Everything stochastic in the toolkit flows through RandomStream so that
// results are reproducible bit-for-bit across platforms, thread counts and
// runs.  std::random distributions are avoided on purpose: their output is
// implementation-defined.

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

// Finalizer from splitmix64; a decent 64-bit bijective mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and an index.
// Used for per-run / per-sample streams; mixing twice keeps (master, index)
// pairs from colliding across the index ranges we use (< 2^32).
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master ^ 0xd2b74407b1ce6e93ull) + (index + 1) * kGoldenGamma);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += kGoldenGamma);
    return mix64(z);
  }

  // Uniform on [0,1), 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0,1); safe to take logs of.
  double next_open_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.  No caching of the second value: a
  // fixed draw count per call matters more here than saving a cosine.
  double next_normal() {
    double u1 = next_open_unit();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 handled with the
  // usual Gamma(shape+1) * U^(1/shape) boost.
  double next_gamma(double shape) {
    if (shape < 1.0) {
      double u = next_open_unit();
      return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x = next_normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = next_open_unit();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace rwre
