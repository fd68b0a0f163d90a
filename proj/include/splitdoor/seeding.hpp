#pragma once

#include <cstdint>
#include <string_view>

namespace splitdoor {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a over the bytes of a string; stable across platforms.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t value) noexcept
{
    return mix64(seed ^ mix64(value));
}

/// Per-test seed: a function of the run seed and the test's identity only,
/// so results do not depend on scheduling.
constexpr std::uint64_t period_seed(std::uint64_t base_seed, std::string_view focal_id,
                                    std::string_view target_id, std::uint64_t period_index) noexcept
{
    std::uint64_t s = combine_seed(base_seed, fnv1a(focal_id));
    s = combine_seed(s, fnv1a(target_id));
    return combine_seed(s, period_index);
}

}  // namespace splitdoor
