#ifndef RANOPT_RNG_HPP
#define RANOPT_RNG_HPP

#include <cstdint>

namespace ranopt {

/// PCG32 (O'Neill's pcg_setseq_64_xsh_rr_32). Chosen over <random> engines
/// because its output is reproducible bit-for-bit across platforms and it
/// supports independent streams, so one trial = one (seed, stream) pair.
class Pcg32 {
public:
    explicit Pcg32(std::uint64_t seed = 0x853c49e6748fea9bULL,
                   std::uint64_t stream = 0xda3e39cb94b95bdbULL) {
        inc_ = (stream << 1u) | 1u;
        state_ = 0u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted =
            static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
    }

    /// Unbiased integer in [0, bound) via rejection sampling.
    std::uint32_t next_below(std::uint32_t bound) {
        std::uint32_t threshold = (-bound) % bound;
        for (;;) {
            std::uint32_t r = next_u32();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        std::uint64_t hi = next_u32();
        std::uint64_t lo = next_u32();
        std::uint64_t bits53 = ((hi << 32) | lo) >> 11;
        return static_cast<double>(bits53) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    bool coin() { return (next_u32() & 1u) != 0u; }

private:
    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 0;
};

/// SplitMix64 step, used to derive well-separated seeds from (base, index).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace ranopt

#endif
