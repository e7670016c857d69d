#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace comet {

// Seeded generator with explicit draw helpers so that every sampling
// decision in the pipeline is reproducible from a single integer seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound) {
    // Rejection sampling to kill modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal deviate (Box-Muller, no cached spare).
  double normal() {
    double u1;
    do {
      u1 = uniform_double();
    } while (u1 <= 0.0);
    const double u2 = uniform_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool bernoulli(double p) { return uniform_double() < p; }

  // Binomial(n, p) draw; n small enough that per-trial summation is fine
  // for the sizes used here would be wasteful, so use the STL sampler.
  std::uint64_t binomial(std::uint64_t n, double p) {
    std::binomial_distribution<std::uint64_t> dist(n, p);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace comet
