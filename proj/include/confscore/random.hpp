#pragma once

// Platform-stable randomness.
//
// Every seeded sequence in this library is drawn from std::mt19937_64
// constructed with the 64-bit seed; its output is fixed by the C++ standard.
// Distributions that feed file-format contracts (shuffles) are implemented
// here instead of via std::uniform_int_distribution, whose algorithm is
// implementation-defined.

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace confscore {

using Engine = std::mt19937_64;

// Uniform integer in [0, bound) by rejection: draws r until
// r >= (2^64 - bound) mod bound, then returns r mod bound. bound must be > 0.
inline std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = engine();
        if (r >= threshold) return r % bound;
    }
}

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform_unit(Engine& engine) { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives the seed of an independent sub-stream: mix64(seed ^ mix64(stream)).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return mix64(seed ^ mix64(stream)); }

// In-place Fisher-Yates: for i = n-1 down to 1, swap items[i] with
// items[uniform_below(i + 1)].
template <typename T>
void shuffle(std::span<T> items, Engine& engine) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(engine, i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

} // namespace confscore
