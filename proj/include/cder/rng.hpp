#pragma once

// Self-contained deterministic random number generation. The standard
// library's engines are portable but its distributions are not, so both
// live here: xoshiro256** for the integer stream and explicit uniform /
// normal transforms on top of it.
//
// Stream splitting: Rng(seed, stream, substream) folds the stream
// identifiers into the SplitMix64 seeding state, so e.g. the generator for
// cloud #17 of an experiment is independent of whether clouds 0..16 were
// generated before it.

#include <cmath>
#include <cstdint>

namespace cder {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0) {
        std::uint64_t sm = seed;
        sm ^= 0xd1b54a32d192ed03ull * (stream + 1);
        sm ^= 0x8cb92ba72f3d8dd7ull * (substream + 1);
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [lo, hi] inclusive, rejection-sampled (no modulo bias).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next_u64()); // full range
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t draw;
        do {
            draw = next_u64();
        } while (draw >= limit);
        return lo + static_cast<std::int64_t>(draw % span);
    }

    /// Standard normal via Box-Muller; pairs are cached so consumption is
    /// exactly two uniforms per two normals.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        // u1 in (0, 1] keeps the log finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace cder
