#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vmcsim {

// Deterministic seed derivation (splitmix64). Used to fan a base seed out
// into independent streams (host catalog, vm catalog, traces, selection, ...)
// so that adding a consumer never perturbs the others.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform double in [0,1). mt19937_64 output is pinned by the standard, and
// scaling the raw bits keeps results identical across standard libraries
// (std::uniform_real_distribution is not portable).
inline double next_unit(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Multiply-shift map over the full 64-bit output.
inline std::uint64_t next_below(std::mt19937_64& g, std::uint64_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(g()) * n) >> 64);
}

// FNV-1a 64. std::hash is implementation-defined; outputs that land in
// persisted files must not depend on it.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace vmcsim
