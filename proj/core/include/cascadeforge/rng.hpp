#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace cascadeforge {

// Deterministic random stream. All draws are hand-rolled on top of a
// splitmix-seeded xoshiro-style 64-bit generator so that sequences are
// bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller.
  double gaussian();

  // Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

  // Mixes a stream id into a seed so derived generators are decorrelated.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t state_[4];
};

}  // namespace cascadeforge
