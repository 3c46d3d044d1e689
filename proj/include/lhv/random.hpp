#pragma once

// One seedable generator for the whole library. Streams are split by hashing
// (base seed, stream index) with SplitMix64, so Monte Carlo work cut into
// fixed-size chunks gives the same numbers no matter how many threads run it.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace lhv {

using Seed = std::uint64_t;

Seed derive_seed(Seed base, std::uint64_t stream) noexcept;

class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline constexpr std::size_t default_chunk_size = 4096;

/// Calls fn(chunk_index, begin, end) for each chunk of [0, total). Chunks are
/// distributed over `threads` workers; fn must only touch chunk-local state.
void for_each_chunk(std::size_t total, std::size_t chunk_size, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t chunk_count(std::size_t total, std::size_t chunk_size) {
  return (total + chunk_size - 1) / chunk_size;
}

}  // namespace lhv
