#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cbrl {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stream tags keep training, testing and search seeds disjoint.
namespace seed_tag {
inline constexpr std::uint64_t train = 0x7472616eULL;
inline constexpr std::uint64_t test = 0x74657374ULL;
inline constexpr std::uint64_t fitness = 0x66697400ULL;
inline constexpr std::uint64_t search = 0x73726368ULL;
inline constexpr std::uint64_t qlbo = 0x716c626fULL;
}  // namespace seed_tag

/// Deterministically derive a child seed from a master seed and a path of tags/indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master);
    for (auto p : path) h = mix64(h ^ mix64(p));
    return h;
}

}  // namespace cbrl
