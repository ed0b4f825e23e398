#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace ripforge {

/// Advances a splitmix64 state and returns the next output word.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Deterministic pseudorandom stream (xoshiro256++) seeded via splitmix64.
///
/// Streams are the only source of randomness in the library. Every sampler
/// takes a stream by reference; two streams with the same seed produce the
/// same sequence on every platform this library targets.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
        has_cached_gaussian_ = false;
        cached_gaussian_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1); never returns exactly 0.
    double uniform01_open() {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return u;
    }

    /// Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
        const std::uint64_t threshold = (0
            - bound) % bound;  // 2^64 mod bound
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Standard normal draw (Marsaglia polar, one value cached).
    double gaussian() {
        if (has_cached_gaussian_) {
            has_cached_gaussian_ = false;
            return cached_gaussian_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        cached_gaussian_ = v * factor;
        has_cached_gaussian_ = true;
        return u * factor;
    }

    /// +1 or -1 with equal probability.
    double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    bool has_cached_gaussian_;
    double cached_gaussian_;
};

/// Derives an independent stream from a master seed, a purpose tag and a
/// trial index. Results do not depend on how many other streams were derived
/// or in which order, which keeps parallel runs reproducible.
inline RngStream derive_stream(std::uint64_t master_seed, std::string_view tag, std::uint64_t index) {
    std::uint64_t s = master_seed;
    std::uint64_t a = splitmix64_next(s);
    s ^= fnv1a64(tag) + 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64_next(s);
    s ^= (index + 1) * 0xda942042e4dd58b5ULL;
    std::uint64_t c = splitmix64_next(s);
    return RngStream(a ^ (b * 0xd1342543de82ef95ULL) ^ c);
}

}  // namespace ripforge
