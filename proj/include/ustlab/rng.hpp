#pragma once

// Deterministic cross-platform randomness: xoshiro256++ seeded through
// splitmix64, with independent streams derived from (seed, stream id).

#include <cstdint>

namespace ustlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL);
    return splitmix64(s);
}

// Stream handle: identical (seed, stream) gives identical realizations.
struct RandomSource {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    RandomSource substream(std::uint64_t i) const { return {seed, mix64(stream, i)}; }
};

class Rng {
  public:
    explicit Rng(RandomSource src) {
        std::uint64_t s = mix64(src.seed, src.stream);
        for (auto& w : s_) w = splitmix64(s);
    }

    Rng(std::uint64_t seed, std::uint64_t stream) : Rng(RandomSource{seed, stream}) {}

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform direction index in {0,1,2,3} from the top bits.
    std::uint32_t next_direction() { return static_cast<std::uint32_t>(next_u64() >> 62); }

    // Lemire's unbiased bounded sampler.
    std::uint64_t next_below(std::uint64_t bound) {
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<__uint128_t>(next_u64()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform in [0,1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

}  // namespace ustlab
