#pragma once

#include <cstdint>

namespace dynrank {

/// Deterministic counter-based generator (splitmix64 finalizer over a keyed
/// counter). Output is a pure function of (seed, stream, counter), so results
/// are identical across platforms and independent of call interleaving when
/// streams are assigned deterministically.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ull))), ctr_(0) {}

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * 0x9e3779b97f4a7c15ull); }

  /// uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// uniform on [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// uniform integer in [0, m)
  std::uint64_t below(std::uint64_t m) {
    // 128-bit multiply trick keeps the modulo bias negligible for m << 2^64.
    unsigned __int128 prod = static_cast<unsigned __int128>(next_u64()) * m;
    return static_cast<std::uint64_t>(prod >> 64);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace dynrank
