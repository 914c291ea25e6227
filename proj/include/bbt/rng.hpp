#pragma once

// Counter-based random number generation. Every draw is a pure function of
// a 64-bit key, so random streams can be indexed by (seed, chain, iteration,
// dimension label) instead of by call order. Two consequences we rely on:
//
//  * chains and partitions can be evaluated in any order (or in parallel)
//    with bit-identical results, and
//  * permuting the team order permutes the draws exactly, as long as each
//    dimension keeps its stream label.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace bbt::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h + kGolden + v);
}

inline constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a) {
    return combine(mix64(seed + kGolden), a);
}

inline constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return combine(key(seed, a), b);
}

inline constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                   std::uint64_t c) {
    return combine(key(seed, a, b), c);
}

// Uniform double in (0, 1); never returns an exact endpoint.
inline double uniform01(std::uint64_t k) {
    return (static_cast<double>(mix64(k) >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two decorrelated uniforms.
inline double normal(std::uint64_t k) {
    const double u1 = uniform01(combine(k, 0x243f6a8885a308d3ull));
    const double u2 = uniform01(combine(k, 0x13198a2e03707344ull));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Uniform integer in [0, n).
inline std::uint64_t below(std::uint64_t k, std::uint64_t n) {
    return mix64(k) % n;
}

}  // namespace bbt::rng
