#include "mandala/mandala.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mandala;

TEST_CASE("perlin is zero on the lattice") {
    for (std::uint64_t seed : {0ull, 1ull, 12345ull, ~0ull}) {
        const PerlinProcess p(seed, 0.5);
        CHECK(p(6.0) == 0.0);  // 6 * 0.5 = 3
        for (int i = -20; i <= 20; ++i) CHECK(p(2.0 * i) == 0.0);
    }
    const PerlinProcess p(9, 0.35);
    CHECK(std::abs(p(3.0 / 0.35)) < 1e-12);
}

TEST_CASE("perlin is deterministic and seed dependent") {
    const PerlinProcess a(5, 0.35), b(5, 0.35), c(6, 0.35);
    int differ = 0;
    for (double t = 0.1; t < 50.0; t += 0.37) {
        CHECK(a(t) == b(t));
        differ += a(t) != c(t);
    }
    CHECK(differ > 100);
}

TEST_CASE("perlin bound over a brute-force scan") {
    // The max of |n| for unit gradients is 2 * max_u [u(1-f(u)) + f(u)(1-u)] = 1 at u = 1/2.
    double worst_shape = 0.0;
    for (int i = 0; i <= 100000; ++i) {
        const double u = i / 100000.0;
        const double f = perlin_fade(u);
        worst_shape = std::max(worst_shape, 2.0 * (u * (1.0 - f) + f * (1.0 - u)));
    }
    CHECK(worst_shape <= 1.0 + 1e-15);

    const PerlinProcess p(77, 1.0);
    double max_abs = 0.0;
    for (int i = 0; i < 1000000; ++i) max_abs = std::max(max_abs, std::abs(p(i * 0.0137 - 5000.0)));
    CHECK(max_abs <= 1.0);
    CHECK(max_abs > 0.5);
}

TEST_CASE("perlin is C1: finite-difference slope is continuous across cells") {
    const PerlinProcess p(11, 1.0);
    const double h = 1e-6;
    for (int cell = -5; cell < 5; ++cell) {
        const double x = cell;
        const double left = (p(x) - p(x - h)) / h;
        const double right = (p(x + h) - p(x)) / h;
        CHECK(std::abs(left - right) < 1e-4);
        // Slope at a lattice point equals 2 * gradient.
        CHECK(right == doctest::Approx(2.0 * p.gradient(cell)).epsilon(1e-4));
    }
}

TEST_CASE("default config and validation") {
    const auto cfg = MandalaConfig::uniform();
    CHECK(cfg.particle_count == 96);
    CHECK(cfg.outer_radius == 1.0);
    CHECK(cfg.inner_radius == 0.25);
    CHECK(cfg.omega.size() == 96);
    CHECK(cfg.noise_amplitude == 1.1);
    CHECK(cfg.noise_frequency == 0.35);
    CHECK_NOTHROW(cfg.validate());

    auto bad = cfg;
    bad.inner_radius = bad.outer_radius;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.phase.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.particle_count = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.noise_amplitude = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("position examples") {
    auto cfg = MandalaConfig::uniform(4, 1.0, 0.25, 0.7, 3.1, 1.1, 0.5);
    cfg.phase.assign(4, 0.0);
    const Mandala mandala(cfg);

    const Point ring = mandala.position(0, 0.0, 1.0);
    CHECK(ring.x == 0.75);
    CHECK(ring.y == 0.0);

    // s = 2 is on the lattice of both processes (2 * 0.5 = 1).
    const Point noise = mandala.position(1, 2.0, 0.0);
    CHECK(noise.x == 0.0);
    CHECK(noise.y == 0.0);

    const Point half = mandala.position(2, 2.0, 0.5);
    const Point full = mandala.position(2, 2.0, 1.0);
    CHECK(half.x == doctest::Approx(0.5 * full.x).epsilon(1e-15));
    CHECK(half.y == doctest::Approx(0.5 * full.y).epsilon(1e-15));

    cfg.phase.assign(4, 0.0);
    CHECK_THROWS_AS((void)mandala.position(4, 0.0, 0.5), std::out_of_range);
}

TEST_CASE("per-particle phase shifts time") {
    auto cfg = MandalaConfig::uniform(8);
    const Mandala mandala(cfg);
    auto shifted = cfg;
    shifted.phase.assign(8, 0.0);
    const Mandala unshifted(shifted);
    for (std::size_t q = 0; q < 8; ++q) {
        const Point a = mandala.position(q, 1.5, 1.0);
        const Point b = unshifted.position(q, 1.5 + cfg.phase[q], 1.0);
        CHECK(a.x == doctest::Approx(b.x).epsilon(1e-12));
        CHECK(a.y == doctest::Approx(b.y).epsilon(1e-12));
    }
}

TEST_CASE("ring at m=1 spreads particles evenly") {
    const Mandala mandala(MandalaConfig::uniform(96));
    const auto frame = mandala.frame(0.0, 1.0);
    // At t=0 each particle sits at outer angle 2 pi q / L.
    for (std::size_t q = 0; q < 96; ++q) {
        const double r = std::hypot(frame.positions[q].x, frame.positions[q].y);
        CHECK(r >= 0.75 - 1e-12);
        CHECK(r <= 1.25 + 1e-12);
    }
}

TEST_CASE("frame regimes and determinism") {
    const Mandala mandala(MandalaConfig::uniform(96, 1.0, 0.25, 0.4, 2.0, 1.1, 0.35, 2024));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> t_dist(0.0, 500.0);
    for (int i = 0; i < 100; ++i) {
        const double t = t_dist(rng);
        const auto ring = mandala.frame(t, 1.0);
        const auto cloud = mandala.frame(t, 0.0);
        REQUIRE(ring.positions.size() == 96);
        CHECK(ring.t == t);
        CHECK(ring.m == 1.0);
        for (const auto& p : ring.positions) {
            const double r = std::hypot(p.x, p.y);
            CHECK(r >= 0.75 - 1e-12);
            CHECK(r <= 1.25 + 1e-12);
        }
        for (const auto& p : cloud.positions) {
            CHECK(std::abs(p.x) <= 1.1);
            CHECK(std::abs(p.y) <= 1.1);
            CHECK(std::hypot(p.x, p.y) <= std::sqrt(2.0) * 1.1);
        }
        const auto again = mandala.frame(t, 0.37);
        CHECK(again.positions == mandala.frame(t, 0.37).positions);
    }
}

TEST_CASE("noise processes are uncorrelated") {
    const auto cfg = MandalaConfig::uniform(6, 1.0, 0.25, 0.4, 2.0, 1.0, 0.35, 8);
    const MandalaNoise noise(cfg);
    std::vector<std::vector<double>> series;
    for (std::size_t q = 0; q < 6; ++q) {
        for (int axis = 0; axis < 2; ++axis) {
            const auto& p = axis == 0 ? noise.x(q) : noise.y(q);
            std::vector<double> s(10000);
            for (int i = 0; i < 10000; ++i) s[i] = p(i * 1.7);
            series.push_back(std::move(s));
        }
    }
    auto pearson = [](const std::vector<double>& a, const std::vector<double>& b) {
        const double n = static_cast<double>(a.size());
        double ma = 0, mb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
        ma /= n;
        mb /= n;
        double sab = 0, saa = 0, sbb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sab += (a[i] - ma) * (b[i] - mb);
            saa += (a[i] - ma) * (a[i] - ma);
            sbb += (b[i] - mb) * (b[i] - mb);
        }
        return sab / std::sqrt(saa * sbb);
    };
    for (std::size_t i = 0; i < series.size(); ++i) {
        for (std::size_t j = i + 1; j < series.size(); ++j) CHECK(std::abs(pearson(series[i], series[j])) < 0.1);
    }
    CHECK(MandalaNoise::sub_seed(8, 0, 0) != MandalaNoise::sub_seed(8, 0, 1));
}

TEST_CASE("continuity at default speeds") {
    const auto cfg = MandalaConfig::uniform();
    const Mandala mandala(cfg);
    const double scale = cfg.outer_radius + cfg.inner_radius + cfg.noise_amplitude;
    for (double t = 0.0; t < 100.0; t += 0.731) {
        for (double m : {0.0, 0.4, 1.0}) {
            for (std::size_t q = 0; q < cfg.particle_count; q += 7) {
                const Point a = mandala.position(q, t, m);
                const Point b = mandala.position(q, t + 1e-4, m);
                CHECK(std::hypot(a.x - b.x, a.y - b.y) < 1e-2 * scale);
            }
        }
    }
}
