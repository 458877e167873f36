#pragma once

#include <cstdint>
#include <random>

namespace lockopt {

/// Derives an independent stream seed from a master seed (splitmix64 finalizer).
constexpr uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic RNG. All draws go through explicit helpers instead of
/// standard-library distributions, so streams are identical across platforms.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). Masked rejection sampling, unbiased.
    uint32_t below(uint32_t bound) {
        if (bound <= 1) return 0;
        uint32_t mask = bound - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        for (;;) {
            uint32_t v = static_cast<uint32_t>(next()) & mask;
            if (v < bound) return v;
        }
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace lockopt
