#pragma once

#include <cstdint>

namespace mandala {

// splitmix64 finalizer; used for sub-seed derivation and hashed lattice gradients.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
    return mix64(seed ^ mix64(value + 0x632BE59BD9B4E019ull));
}

// Uniform in [0, 1) from the top 53 bits.
constexpr double unit_double(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in [-1, 1].
constexpr double signed_unit(std::uint64_t bits) noexcept {
    return 2.0 * unit_double(bits) - 1.0;
}

/// Small deterministic generator (splitmix64 stream). Portable across
/// standard libraries, unlike std::uniform_real_distribution.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    constexpr double uniform() noexcept { return unit_double(next()); }
    constexpr double uniform_signed() noexcept { return signed_unit(next()); }

private:
    std::uint64_t state_;
};

}  // namespace mandala
