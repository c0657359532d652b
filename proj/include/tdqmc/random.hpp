#pragma once

#include <cstdint>

namespace tdqmc {

/// Counter-based generator: every draw is a pure hash of
/// (seed, stream, counter), so results do not depend on evaluation order or
/// thread scheduling. One stream per walker coordinate and purpose.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed);

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const;

  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter) const;

  /// Standard normal via Box-Muller on counters 2c and 2c+1.
  double normal(std::uint64_t stream, std::uint64_t counter) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
};

enum class StreamPurpose : std::uint64_t { init = 1, drift = 2, proposal = 3, accept = 4 };

/// Stream id for walker k, electron e (0/1; use 2 for pair-level draws).
constexpr std::uint64_t stream_id(StreamPurpose p, std::uint64_t walker, std::uint64_t electron) {
  return (static_cast<std::uint64_t>(p) << 56) | (walker << 2) | electron;
}

}  // namespace tdqmc
