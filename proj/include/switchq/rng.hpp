#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace switchq {

// Deterministic, platform-independent random streams. Monte Carlo work is
// partitioned into streams keyed by (seed, stream id); merging partial sums
// in fixed stream order makes results independent of the worker count.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  Rng() : Rng(0, 0) {}

  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t init = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
    for (auto& word : state_) word = splitmix64(init);
    bool all_zero = true;
    for (auto word : state_) all_zero = all_zero && word == 0;
    if (all_zero) state_[0] = 1;
  }

  // xoshiro256** step.
  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double u01_open() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be nonnegative");
    std::uint64_t total = 0;
    // Knuth's product method, chunked so exp(-mean) never underflows.
    while (mean > 30.0) {
      total += poisson_knuth(30.0);
      mean -= 30.0;
    }
    if (mean > 0.0) total += poisson_knuth(mean);
    return total;
  }

  // Sorted uniform points on [lo, hi] (order statistics of a Poisson sample).
  std::vector<double> sorted_uniforms(std::size_t count, double lo, double hi) {
    std::vector<double> pts(count);
    for (auto& p : pts) p = lo + (hi - lo) * u01();
    std::sort(pts.begin(), pts.end());
    return pts;
  }

  // Draws an index from a probability row (cumulative scan).
  std::size_t sample_row(std::span<const double> probs) {
    const double u = u01();
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return i;
    }
    return probs.size() - 1;
  }

 private:
  std::uint64_t poisson_knuth(double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = 1.0;
    do {
      ++k;
      prod *= u01_open();
    } while (prod > limit);
    return k - 1;
  }

  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace switchq
