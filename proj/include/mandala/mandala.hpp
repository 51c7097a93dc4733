#pragma once

// Epicyclic particle mandala. Particle q at time t, with s = t + phase[q]:
//   z_q = m (R e^{i omega_q s} - r e^{i Omega_q s}) + (1 - m) A (Nx_q(s) + i Ny_q(s))
// where A is noise_amplitude and Nx_q, Ny_q are independent Perlin processes.

#include "mandala/perlin.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace mandala {

struct MandalaConfig {
    std::size_t particle_count = 96;
    double outer_radius = 1.0;
    double inner_radius = 0.25;
    std::vector<double> omega;  // rad/s, one per particle
    std::vector<double> Omega;  // rad/s, one per particle
    std::vector<double> phase;  // seconds, one per particle
    double noise_amplitude = 1.1;
    double noise_frequency = 0.35;  // Hz
    std::uint64_t seed = 0;

    /// Uniform speeds for every particle; phases spread the particles evenly
    /// around the outer circle (phase[q] = 2 pi q / (L omega)).
    static MandalaConfig uniform(std::size_t particle_count = 96, double outer_radius = 1.0,
                                 double inner_radius = 0.25, double omega = 0.4,
                                 double Omega = 2.0, double noise_amplitude = 1.1,
                                 double noise_frequency = 0.35, std::uint64_t seed = 0);

    /// Throws std::invalid_argument on a broken invariant.
    void validate() const;

    [[nodiscard]] double ring_min() const;
    [[nodiscard]] double ring_max() const;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

struct ParticleFrame {
    double t = 0.0;
    double m = 0.0;
    std::vector<Point> positions;
    bool operator==(const ParticleFrame&) const = default;
};

/// The 2L Perlin processes of a mandala, sub-seeded from (seed, q, axis).
class MandalaNoise {
public:
    MandalaNoise() = default;
    explicit MandalaNoise(const MandalaConfig& cfg);

    [[nodiscard]] const PerlinProcess& x(std::size_t q) const { return processes_[2 * q]; }
    [[nodiscard]] const PerlinProcess& y(std::size_t q) const { return processes_[2 * q + 1]; }
    [[nodiscard]] std::size_t particle_count() const { return processes_.size() / 2; }

    static std::uint64_t sub_seed(std::uint64_t seed, std::size_t q, int axis);

private:
    std::vector<PerlinProcess> processes_;
};

/// Throws std::out_of_range for q >= L.
Point particle_position(const MandalaConfig& cfg, const MandalaNoise& noise, std::size_t q,
                        double t, double m);

ParticleFrame step_frame(const MandalaConfig& cfg, const MandalaNoise& noise, double t, double m);

/// Allocation-free variant; `out` must hold L points.
void step_frame_into(const MandalaConfig& cfg, const MandalaNoise& noise, double t, double m,
                     std::span<Point> out);

/// Config plus its noise tables, kept in sync.
class Mandala {
public:
    explicit Mandala(MandalaConfig cfg);

    [[nodiscard]] const MandalaConfig& config() const { return cfg_; }
    [[nodiscard]] const MandalaNoise& noise() const { return noise_; }

    [[nodiscard]] Point position(std::size_t q, double t, double m) const {
        return particle_position(cfg_, noise_, q, t, m);
    }
    [[nodiscard]] ParticleFrame frame(double t, double m) const {
        return step_frame(cfg_, noise_, t, m);
    }

private:
    MandalaConfig cfg_;
    MandalaNoise noise_;
};

}  // namespace mandala
