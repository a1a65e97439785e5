#pragma once

// Deterministic RNG primitives. std::shuffle and std::normal_distribution are
// implementation-defined, so everything that feeds a reproducibility contract
// (dataset sampling, weight init, epoch shuffles) runs on this fixed engine.

#include <cmath>
#include <cstdint>
#include <vector>

namespace esnet {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct SplitMix64 {
  std::uint64_t state = 0;

  SplitMix64() = default;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += kGolden;
    return splitmix64_finalize(state);
  }

  // uniform in [0, 1) with 53 random bits
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Box–Muller; the second variate is cached so one draw
  // consumes a well-defined number of engine steps
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Independent stream seed for item `index` under `base`. Equivalent to the
// (index+1)-th output of a SplitMix64 seeded with `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64_finalize(base + (index + 1) * kGolden);
}

// Fisher–Yates with fixed traversal order; identical permutation on every
// platform for a given seed.
template <typename T>
inline void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace esnet
