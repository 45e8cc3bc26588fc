#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace priosample {

/// Maps a 64-bit draw to the open interval (0,1) as (u+1)/2^64, computed in
/// extended precision. The conversion back to double is clamped below 1.0,
/// which equals rounding the quotient toward zero at the top of the range, so
/// neither endpoint can ever be produced.
inline double alpha_from_bits(std::uint64_t u) {
    long double t = (static_cast<long double>(u) + 1.0L) * 0x1p-64L;
    double a = static_cast<double>(t);
    if (a >= 1.0)
        a = std::nextafter(1.0, 0.0);
    return a;
}

/// Deterministic stream of uniform variates: a 64-bit seed plus a position
/// counter (SplitMix64). The same seed always yields the bit-identical
/// sequence, and any position can be jumped to directly.
class SeededGenerator {
public:
    SeededGenerator() = default;
    explicit SeededGenerator(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t position() const { return position_; }
    void seek(std::uint64_t position) { position_ = position; }

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + (++position_) * 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform variate strictly inside (0,1).
    double next_alpha() { return alpha_from_bits(next_u64()); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t position_ = 0;
};

inline double draw_alpha(SeededGenerator& gen) { return gen.next_alpha(); }

/// Seed for an independent substream (replicate, thread block, scheme lane).
/// Streams derived from distinct indices are decorrelated by a full mix.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace priosample
