#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace mvsel {

// Seeded random source with a fixed, documented algorithm so that generated
// fixtures are reproducible across platforms and standard libraries:
//   engine   std::mt19937_64 (output sequence is fixed by the C++ standard)
//   uniform  top 53 bits of one engine output, scaled to [0, 1)
//   integer  rejection sampling on the engine output (no modulo bias)
//   normal   Box-Muller, consuming two uniforms per variate, no caching
//   shuffle  Fisher-Yates from the back using `below`
// The std:: distributions are deliberately not used: their output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t below(std::uint64_t n);
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; derives independent stream seeds from one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mvsel
