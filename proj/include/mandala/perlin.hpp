#pragma once

#include <cstdint>

namespace mandala {

/// One-octave 1-D gradient noise with quintic fade. Output lies in [-1, 1],
/// is exactly zero at integer lattice coordinates and is C1 in t.
class PerlinProcess {
public:
    PerlinProcess() = default;
    PerlinProcess(std::uint64_t seed, double frequency) : seed_(seed), frequency_(frequency) {}

    [[nodiscard]] double operator()(double t) const;

    /// Gradient (slope) at a lattice point, in [-1, 1].
    [[nodiscard]] double gradient(std::int64_t lattice) const;

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] double frequency() const { return frequency_; }

private:
    std::uint64_t seed_ = 0;
    double frequency_ = 1.0;
};

inline double perlin1(const PerlinProcess& process, double t) { return process(t); }

/// Quintic fade 6u^5 - 15u^4 + 10u^3.
constexpr double perlin_fade(double u) { return u * u * u * (u * (u * 6.0 - 15.0) + 10.0); }

}  // namespace mandala
