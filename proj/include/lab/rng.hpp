#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace lab {

// One SplitMix64 step. Used only to derive stream seeds, never as the
// work engine itself.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives the seed of independent stream `index` from a master seed. Streams
// are reproducible regardless of scheduling: restart/trial/seed k always sees
// the same engine state. Documented recipe (for alternate implementations):
// state = master XOR (index+1)*0x9E3779B97F4A7C15; two splitmix64 rounds;
// the second output is the stream seed. Engine: std::mt19937_64.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master ^ ((index + 1) * 0x9E3779B97F4A7C15ULL);
  (void)splitmix64(state);
  return splitmix64(state);
}

// Deterministic RNG wrapper. mt19937_64 output is fully specified by the
// standard; the double conversions below are hand-rolled so values never
// depend on library-specific distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fair sign in {-1, +1}.
  double sign() { return (engine_() & 1ULL) ? 1.0 : -1.0; }

  // Integer in [0, n). Modulo bias is < 2^-50 for the small n used here.
  int index(int n) {
    return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
  }

  // Integer in [lo, hi] inclusive.
  int range(int lo, int hi) { return lo + index(hi - lo + 1); }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lab
