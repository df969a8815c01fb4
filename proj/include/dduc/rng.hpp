#pragma once

#include <cstdint>
#include <limits>

namespace dduc {

// SplitMix64. Small state, full 2^64 period, and statistically solid for
// simulation; usable with the <random> distributions.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a base seed and stream labels.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  SplitMix64 g(seed ^ (a * 0xD1B54A32D192ED03ULL));
  g();
  SplitMix64 h(g() ^ (b * 0x8CB92BA72F3D8DD7ULL));
  h();
  return h();
}

// Seed for parallel search worker `worker` (1-based).
inline std::uint64_t worker_seed(std::uint64_t base, std::uint64_t worker) { return base ^ worker; }

}  // namespace dduc
