#pragma once

#include <cstdint>
#include <random>

namespace visitlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of trajectory j under base seed s. Depends on (s, j) only, so the
// assignment of trajectories to workers never changes the draws.
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t j) {
  return splitmix64(base ^ splitmix64(j + 0x5851f42d4c957f2dULL));
}

// Thin wrapper over mt19937_64 with portable variate generation. The
// std:: distributions are implementation-defined, which would break
// cross-platform reproducibility of reports.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1], safe for log().
  double uniform_pos() { return 1.0 - uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Poisson by sequential inversion; fine for the moderate means used here.
  std::uint64_t poisson(double mean);

  // Geometric count of failures before the first success, P(k) = (1-s)^k s.
  std::uint64_t geometric_failures(double success);

 private:
  std::mt19937_64 engine_;
};

}  // namespace visitlab
