#include "tdqmc/random.hpp"

#include <cmath>
#include <numbers>

namespace tdqmc {

namespace {

// splitmix64 finalizer
constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

CounterRng::CounterRng(std::uint64_t seed) : seed_(seed), key_(mix(seed + kGolden)) {}

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t counter) const {
  std::uint64_t h = mix(key_ ^ (stream * kGolden));
  h = mix(h + counter * 0xd1b54a32d192ed03ULL + kGolden);
  return mix(h ^ key_);
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t counter) const {
  // 53 random bits, shifted by half an ulp so 0 is never returned
  return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t counter) const {
  const double u1 = uniform(stream, 2 * counter);
  const double u2 = uniform(stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace tdqmc
