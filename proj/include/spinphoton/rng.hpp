#pragma once

// Deterministic random numbers. Every stochastic task derives its generator
// from (seed, stream) so that reruns with the same manifest seed are
// bit-identical regardless of evaluation order. Gaussian draws use an
// explicit Box-Muller transform rather than std::normal_distribution, whose
// output is implementation-defined.

#include <cmath>
#include <cstdint>
#include <random>

namespace spinphoton {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), eng_(splitmix64(seed ^ splitmix64(stream))) {}

  SplitRng child(std::uint64_t k) const { return SplitRng(seed_, splitmix64(stream_) + k + 1); }

  std::uint64_t raw() { return eng_(); }

  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  // Index into a discrete distribution given by cumulative weights.
  int categorical(const double* cdf, int n) {
    double u = uniform01() * cdf[n - 1];
    for (int i = 0; i < n; ++i)
      if (u < cdf[i]) return i;
    return n - 1;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace spinphoton
