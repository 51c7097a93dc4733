#include "mandala/mandala.hpp"

#include "mandala/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mandala {

MandalaConfig MandalaConfig::uniform(std::size_t particle_count, double outer_radius,
                                     double inner_radius, double omega, double Omega,
                                     double noise_amplitude, double noise_frequency,
                                     std::uint64_t seed) {
    MandalaConfig cfg;
    cfg.particle_count = particle_count;
    cfg.outer_radius = outer_radius;
    cfg.inner_radius = inner_radius;
    cfg.omega.assign(particle_count, omega);
    cfg.Omega.assign(particle_count, Omega);
    cfg.phase.resize(particle_count);
    for (std::size_t q = 0; q < particle_count; ++q) {
        cfg.phase[q] = omega != 0.0 ? 2.0 * std::numbers::pi * static_cast<double>(q) /
                                          (static_cast<double>(particle_count) * omega)
                                    : 0.0;
    }
    cfg.noise_amplitude = noise_amplitude;
    cfg.noise_frequency = noise_frequency;
    cfg.seed = seed;
    return cfg;
}

void MandalaConfig::validate() const {
    if (particle_count < 1) throw std::invalid_argument("mandala: particle count must be >= 1");
    if (!(outer_radius > 0.0) || !(inner_radius > 0.0)) {
        throw std::invalid_argument("mandala: radii must be positive");
    }
    if (outer_radius == inner_radius) {
        throw std::invalid_argument("mandala: outer and inner radius must differ");
    }
    if (omega.size() != particle_count || Omega.size() != particle_count ||
        phase.size() != particle_count) {
        throw std::invalid_argument("mandala: omega, Omega and phase need " +
                                    std::to_string(particle_count) + " entries");
    }
    if (!(noise_amplitude >= 0.0)) throw std::invalid_argument("mandala: noise_amplitude < 0");
    if (!std::isfinite(noise_frequency)) throw std::invalid_argument("mandala: bad noise_frequency");
}

double MandalaConfig::ring_min() const { return std::abs(outer_radius - inner_radius); }
double MandalaConfig::ring_max() const { return outer_radius + inner_radius; }

std::uint64_t MandalaNoise::sub_seed(std::uint64_t seed, std::size_t q, int axis) {
    return hash_combine(hash_combine(seed, q), static_cast<std::uint64_t>(axis));
}

MandalaNoise::MandalaNoise(const MandalaConfig& cfg) {
    processes_.reserve(2 * cfg.particle_count);
    for (std::size_t q = 0; q < cfg.particle_count; ++q) {
        processes_.emplace_back(sub_seed(cfg.seed, q, 0), cfg.noise_frequency);
        processes_.emplace_back(sub_seed(cfg.seed, q, 1), cfg.noise_frequency);
    }
}

namespace {

Point position_unchecked(const MandalaConfig& cfg, const MandalaNoise& noise, std::size_t q,
                         double t, double m) {
    const double s = t + cfg.phase[q];
    const double outer = cfg.omega[q] * s;
    const double inner = cfg.Omega[q] * s;
    const double ex = cfg.outer_radius * std::cos(outer) - cfg.inner_radius * std::cos(inner);
    const double ey = cfg.outer_radius * std::sin(outer) - cfg.inner_radius * std::sin(inner);
    const double nx = cfg.noise_amplitude * noise.x(q)(s);
    const double ny = cfg.noise_amplitude * noise.y(q)(s);
    const double w = 1.0 - m;
    return {m * ex + w * nx, m * ey + w * ny};
}

}  // namespace

Point particle_position(const MandalaConfig& cfg, const MandalaNoise& noise, std::size_t q,
                        double t, double m) {
    if (q >= cfg.particle_count || q >= noise.particle_count()) {
        throw std::out_of_range("particle index " + std::to_string(q) + " out of range");
    }
    return position_unchecked(cfg, noise, q, t, m);
}

void step_frame_into(const MandalaConfig& cfg, const MandalaNoise& noise, double t, double m,
                     std::span<Point> out) {
    const std::size_t n = std::min(out.size(), std::min(cfg.particle_count, noise.particle_count()));
    for (std::size_t q = 0; q < n; ++q) out[q] = position_unchecked(cfg, noise, q, t, m);
}

ParticleFrame step_frame(const MandalaConfig& cfg, const MandalaNoise& noise, double t, double m) {
    ParticleFrame frame;
    frame.t = t;
    frame.m = m;
    frame.positions.resize(cfg.particle_count);
    if (noise.particle_count() < cfg.particle_count) {
        throw std::invalid_argument("mandala: noise tables smaller than particle count");
    }
    step_frame_into(cfg, noise, t, m, frame.positions);
    return frame;
}

Mandala::Mandala(MandalaConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    noise_ = MandalaNoise(cfg_);
}

}  // namespace mandala
