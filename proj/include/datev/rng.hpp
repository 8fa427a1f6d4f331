#pragma once

#include <cstdint>
#include <initializer_list>

namespace datev {

/// SplitMix64 finalizer; used to derive independent RNG streams from a run
/// seed plus structural indices (task id, vehicle id, ...), so that task
/// content is identical across policies and across unrelated config changes.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x8BADF00DDEFACEDULL;
    for (std::uint64_t p : parts) h = splitmix64(h ^ p);
    return h;
}

}  // namespace datev
