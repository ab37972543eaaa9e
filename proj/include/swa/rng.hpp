#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <string_view>

namespace swa {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective avalanche mix of one 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives a child seed from a parent seed and a path of integer keys.
///
/// Substreams are addressed by position (trial index, task index, s value),
/// so any single unit of work can be regenerated without replaying the rest.
inline std::uint64_t substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t state = mix64(seed);
    for (std::uint64_t k : keys) state = mix64(state ^ mix64(k + 0x632be59bd9b4e019ULL));
    return state;
}

inline std::uint64_t substream(std::uint64_t seed, std::string_view tag,
                               std::initializer_list<std::uint64_t> keys = {}) {
    std::uint64_t state = mix64(seed ^ hash_tag(tag));
    for (std::uint64_t k : keys) state = mix64(state ^ mix64(k + 0x632be59bd9b4e019ULL));
    return state;
}

inline Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

/// Uniform integer in [0, bound) by rejection on the top bits; avoids the
/// implementation-defined algorithm of std::uniform_int_distribution so draws
/// are identical across standard libraries.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = bound * (std::numeric_limits<std::uint64_t>::max() / bound);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

inline double uniform_open01(Rng& rng) {
    // 53 random mantissa bits, shifted off zero.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal deviates by the polar Box-Muller method (portable across
/// standard libraries, unlike std::normal_distribution).
class NormalSource {
public:
    double operator()(Rng& rng) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, r2;
        do {
            u = 2.0 * uniform_open01(rng) - 1.0;
            v = 2.0 * uniform_open01(rng) - 1.0;
            r2 = u * u + v * v;
        } while (r2 >= 1.0 || r2 == 0.0);
        const double f = std::sqrt(-2.0 * std::log(r2) / r2);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace swa
