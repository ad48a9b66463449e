#ifndef RDREAM_RNG_HPP
#define RDREAM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace rdream {

// SplitMix64 mixing step; the basis of the documented seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Replication seed = chained SplitMix64 over (base, cell, rep). Fixed and
// platform independent, so every replication is reproducible in isolation.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t cell,
                                 std::uint64_t rep) {
  return splitmix64(splitmix64(splitmix64(base) ^ cell) ^ rep);
}

// Deterministic stream of uniforms and normals. Avoids std::*_distribution
// on purpose: those are implementation-defined, this stream is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1) with 53 random bits
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller, one spare cached
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  // uniform integer in [0, bound), rejection sampled (no modulo bias)
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rdream

#endif  // RDREAM_RNG_HPP
