#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace infoshare {

using Rng = std::mt19937_64;

// splitmix64 finalizer. Used only to derive child seeds, never as the
// generator driving draws.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// One independent stream per component path, e.g. (treatment, pair, player).
// Streams depend only on the base seed and the path, not on evaluation
// order, which is what makes session logs reproducible across thread counts.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(base);
    for (std::uint64_t p : path) h = splitmix64(h ^ p);
    return h;
}

inline Rng make_rng(std::uint64_t base,
                    std::initializer_list<std::uint64_t> path = {}) {
    return Rng(derive_seed(base, path));
}

} // namespace infoshare
