#pragma once

// Deterministic random-number helpers shared by the bootstrap and synthetic
// data generators. Everything here is specified exactly so that results are
// reproducible across platforms and can be re-derived in other languages:
//
//   * engine: std::mt19937_64 (bit-portable per the C++ standard)
//   * stream seeding: splitmix64 fold over (seed, tag, indices...)
//   * uniform doubles: top 53 bits of one engine draw, in [0, 1)
//   * gaussians: Box-Muller on two uniform draws (cosine branch only)
//   * bounded integers: rejection sampling on the low bits (unbiased)

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

namespace lrhorizon::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Folds a list of integers into one well-mixed 64-bit stream seed.
inline std::uint64_t mix(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = 0x8f1bbcdcbfa53e0bull;
    std::uint64_t out = 0;
    for (std::uint64_t p : parts) {
        state ^= p;
        out = splitmix64(state);
    }
    return out;
}

inline std::mt19937_64 make_engine(std::initializer_list<std::uint64_t> parts) {
    return std::mt19937_64(mix(parts));
}

/// Uniform double in [0, 1), 53 bits of precision.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Standard normal deviate via Box-Muller; consumes exactly two draws.
inline double gaussian(std::mt19937_64& eng) {
    // u1 in (0, 1] so the log is finite.
    double u1 = static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Unbiased integer in [0, n) by rejection on the modulus.
inline std::uint64_t bounded(std::mt19937_64& eng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = eng();
    while (x >= limit) x = eng();
    return x % n;
}

/// First k entries of a Fisher-Yates shuffle of [0, n); order is not sorted.
inline std::vector<std::size_t> sample_without_replacement(std::mt19937_64& eng,
                                                           std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(bounded(eng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

inline std::vector<std::size_t> sample_with_replacement(std::mt19937_64& eng,
                                                        std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = static_cast<std::size_t>(bounded(eng, n));
    return idx;
}

} // namespace lrhorizon::rng
