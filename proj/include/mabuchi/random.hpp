#pragma once

// Seeded generators for Kähler potentials and tangent probes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "mabuchi/potential.hpp"

namespace mabuchi {

using Rng = std::mt19937_64;

/// Random trigonometric polynomial of degree `modes` with coefficients decaying
/// like 1/k², scaled so that max|u''| (discrete) equals `curvature`; the result
/// has density 1 + u'' >= 1 - curvature.
inline Potential1D random_kahler(const CircleGrid& grid, Rng& rng, double curvature = 0.5, int modes = 4) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    std::vector<double> amp(static_cast<std::size_t>(modes)), ph(static_cast<std::size_t>(modes));
    for (int k = 1; k <= modes; ++k) {
        amp[static_cast<std::size_t>(k - 1)] = coef(rng) / (k * k);
        ph[static_cast<std::size_t>(k - 1)] = phase(rng);
    }
    const double offset = coef(rng);
    auto u = Potential1D::sample(grid, [&](double x) {
        double s = 0.0;
        for (int k = 1; k <= modes; ++k)
            s += amp[static_cast<std::size_t>(k - 1)] * std::cos(2.0 * kPi * k * x + ph[static_cast<std::size_t>(k - 1)]);
        return s;
    });
    double worst = 0.0;
    for (double d : second_difference(u)) worst = std::max(worst, std::abs(d));
    if (worst > 0.0) u *= curvature / worst;
    return u += 0.1 * offset;
}

/// Band-limited tangent vector: a constant plus harmonics up to `modes`, sup norm about one.
inline Potential1D random_tangent(const CircleGrid& grid, Rng& rng, int modes = 4) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double c0 = coef(rng);
    std::vector<double> a(static_cast<std::size_t>(modes)), b(static_cast<std::size_t>(modes));
    for (int k = 0; k < modes; ++k) {
        a[static_cast<std::size_t>(k)] = coef(rng);
        b[static_cast<std::size_t>(k)] = coef(rng);
    }
    auto xi = Potential1D::sample(grid, [&](double x) {
        double s = c0;
        for (int k = 1; k <= modes; ++k)
            s += a[static_cast<std::size_t>(k - 1)] * std::cos(2.0 * kPi * k * x) +
                 b[static_cast<std::size_t>(k - 1)] * std::sin(2.0 * kPi * k * x);
        return s;
    });
    const double scale = std::max(std::abs(xi.max()), std::abs(xi.min()));
    if (scale > 0.0) xi *= 1.0 / scale;
    return xi;
}

}  // namespace mabuchi
