#pragma once

#include <cstdint>
#include <limits>

namespace decaysim {

// SplitMix64 finalizer. Bijective on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform double in [0, 1) from the top 53 bits of a word.
constexpr double to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Purposes separate the substreams a single (seed, entity, step) key feeds.
enum class Draw : std::uint64_t {
  kTransmit = 1,
  kReceiverPick = 2,
  kInterferer = 3,
  kShadow = 4,
  kMisc = 5,
};

// Counter-based draw: a pure function of its key, so results do not depend on
// the order in which entities are evaluated within a step.
constexpr double keyed_uniform(std::uint64_t seed, std::uint64_t entity,
                               std::uint64_t step, Draw purpose,
                               std::uint64_t sub = 0) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ entity);
  h = mix64(h ^ step);
  h = mix64(h ^ static_cast<std::uint64_t>(purpose));
  h = mix64(h ^ sub);
  return to_unit(h);
}

// Sequential generator for setup work (instance synthesis, sampling plans).
// Satisfies UniformRandomBitGenerator; output is identical on every platform.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() noexcept { return to_unit((*this)()); }
  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }
  // Integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound));
  }

 private:
  std::uint64_t state_;
};

}  // namespace decaysim
