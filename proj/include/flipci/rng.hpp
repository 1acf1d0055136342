#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace flipci {

// splitmix64 finalizer: a cheap, well-mixed 64-bit hash.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Order-independent seed derivation: hash(seed, index) for replication and
// gene-level streams so work units can run in any order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index + 0x51f9d85bb7a5c3e1ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(seed ^ h);
}

// Counter-based ±1 draw: a pure function of (seed, flip index, observation
// index), so ensembles regenerate bit-identically regardless of evaluation
// order.
inline double flip_sign(std::uint64_t seed, std::uint64_t flip_index,
                        std::uint64_t obs_index) {
    std::uint64_t h = mix64(seed ^ mix64(flip_index * 0x9e3779b97f4a7c15ULL + 1) ^
                            mix64(obs_index * 0xc2b2ae3d27d4eb4fULL + 2));
    return (h >> 63) ? -1.0 : 1.0;
}

}  // namespace flipci
