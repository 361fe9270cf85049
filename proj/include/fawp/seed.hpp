#pragma once

#include <cstdint>

namespace fawp {

enum class SeedRole : std::uint64_t {
    Channel = 1,
    Data = 2,
    Tuning = 3,
    Oracle = 4,
    Placement = 5,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for one (index, sub-index, role) cell of a campaign. Each field is
/// folded in through mix64 in a fixed order, so the mapping is stable across
/// platforms and independent of scheduling.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t index, std::uint64_t sub_index,
                                   SeedRole role) {
    std::uint64_t s = mix64(master);
    s = mix64(s ^ static_cast<std::uint64_t>(role));
    s = mix64(s ^ index);
    s = mix64(s ^ sub_index);
    return s;
}

} // namespace fawp
