#pragma once

#include <cstdint>
#include <random>

namespace rtlab {

/// Seed for every randomized operation. Equal seeds give bit-identical output.
struct Seed {
    std::uint64_t value = 0;

    friend bool operator==(const Seed&, const Seed&) = default;
};

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Per-stream seed derived from a master seed and a stream index, so that
/// results never depend on which worker ran which stream.
constexpr Seed derive_seed(Seed master, std::uint64_t index, std::uint64_t salt = 0) noexcept {
    return Seed{mix64(mix64(master.value ^ mix64(salt)) + index)};
}

inline Rng make_rng(Seed seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed.value), static_cast<std::uint32_t>(seed.value >> 32)};
    return Rng(seq);
}

/// Uniform integer in [0, bound). bound must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng);
}

}  // namespace rtlab
