#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace deepmap {

// Deterministic randomness helpers. std::mt19937_64 is exactly specified by
// the standard, but the std:: distributions are not; everything that must be
// bit-reproducible across platforms draws through the helpers below.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Mixes a seed with stream identifiers so independent consumers (per graph,
// per vertex, per purpose) get decorrelated, schedule-independent streams.
inline std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ splitmix64(a + 0x9e3779b97f4a7c15ULL));
    s = splitmix64(s ^ splitmix64(b + 0x7f4a7c159e3779b9ULL));
    return std::mt19937_64(s);
}

// Uniform double in [0, 1) with 53 random bits.
inline double next_double(std::mt19937_64 &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound) by rejection; bound must be > 0.
inline std::uint64_t next_index(std::mt19937_64 &rng, std::uint64_t bound) {
    const std::uint64_t limit = ~0ULL - ~0ULL % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

// Uniform integer in [lo, hi] inclusive.
inline std::int64_t next_int(std::mt19937_64 &rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

// Fisher-Yates shuffle driven by next_index, independent of std::shuffle's
// unspecified draw pattern.
template <typename T>
void shuffle(std::vector<T> &v, std::mt19937_64 &rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(next_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace deepmap
