#pragma once

#include <cstdint>
#include <limits>

namespace spadapt {

/// Counter-based generator: output i of stream (seed, stream) is
/// splitmix64(key + i * 0x9E3779B97F4A7C15) with key derived from the pair.
/// Every stochastic routine takes a (seed, stream) pair, so replicate r of an
/// experiment is reproducible on its own, independent of thread scheduling.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal (Box-Muller, pairs cached).
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic child seed for (seed, tag); used to key replicates.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace spadapt
