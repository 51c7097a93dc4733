#include "mandala/perlin.hpp"

#include "mandala/random.hpp"

#include <algorithm>
#include <cmath>

namespace mandala {

double PerlinProcess::gradient(std::int64_t lattice) const {
    return signed_unit(hash_combine(seed_, static_cast<std::uint64_t>(lattice)));
}

double PerlinProcess::operator()(double t) const {
    const double x = t * frequency_;
    const double cell = std::floor(x);
    const double u = x - cell;
    const auto i = static_cast<std::int64_t>(cell);

    const double n0 = gradient(i) * u;
    const double n1 = gradient(i + 1) * (u - 1.0);
    const double value = 2.0 * (n0 + perlin_fade(u) * (n1 - n0));
    return std::clamp(value, -1.0, 1.0);
}

}  // namespace mandala
