#ifndef CXR_RNG_HPP
#define CXR_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace cxr {

// Seeded generator with pinned output derivations. The distributions are
// written out explicitly (instead of std::*_distribution) so that the same
// seed produces the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n) by rejection; unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller, one value per call (the pair's second half is discarded to
  // keep the stream position a pure function of call count).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // Draw m distinct indices from [0, n), order-stable per seed.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t m);

 private:
  std::mt19937_64 engine_;
};

// Stream-splitting rule for parallel workers: worker i derives its stream
// from base_seed XOR i.
inline std::uint64_t worker_seed(std::uint64_t base_seed, std::uint64_t i) {
  return base_seed ^ i;
}

}  // namespace cxr

#endif
