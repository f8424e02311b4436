#pragma once

// L^p Finsler distances between invariant potentials.
//
// Distances come from the initial tangent of the connecting geodesic:
// d_p(u0, u1)^p = ∫ |u̇₀|^p (1 + u0'') dx.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mabuchi/geodesic.hpp"
#include "mabuchi/potential.hpp"

namespace mabuchi {

inline constexpr std::array<double, 8> kExponentSweep = {1.0, 1.5, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};

struct DistanceReport {
    double p = 2.0;
    double value = 0.0;
    std::vector<double> tangent;  // initial tangent the value was computed from
};

/// (∫ |v|^p m dx)^{1/p}; the p-th root is taken relative to max|v| to avoid underflow at large p.
inline double finsler_norm(const CircleGrid& grid, const std::vector<double>& v, const std::vector<double>& density,
                           double p) {
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) sum += std::pow(std::abs(v[j]) / scale, p) * density[j];
    return scale * std::pow(grid.spacing() * sum, 1.0 / p);
}

inline DistanceReport d_p(const Potential1D& u0, const Potential1D& u1, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("d_p: exponent must be at least 1");
    DistanceReport r;
    r.p = p;
    r.tangent = initial_tangent(u0, u1);
    r.value = finsler_norm(u0.grid(), r.tangent, ma_density(u0), p);
    return r;
}

inline double d2(const Potential1D& u0, const Potential1D& u1) { return d_p(u0, u1, 2.0).value; }

/// sup |u̇₀|, the p → ∞ limit of d_p.
inline double d_infinity(const Potential1D& u0, const Potential1D& u1) {
    const auto v = initial_tangent(u0, u1);
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// d₂(u_a, u_b) / (b - a) for two times of the path.
inline double segment_speed(const GeodesicPath& path, double a, double b) {
    if (!(b > a)) throw std::invalid_argument("segment_speed: degenerate interval");
    const double slack = 1e-12 * (path.t_end() - path.t_begin());
    if (a < path.t_begin() - slack || b > path.t_end() + slack)
        throw std::invalid_argument("segment_speed: interval outside the path");
    return d2(path.at(a), path.at(b)) / (b - a);
}

struct Cat0Result {
    bool passes = false;
    double slack = 0.0;  // rhs - lhs
    double lhs = 0.0;    // d(m, w)²
    double rhs = 0.0;    // ½d(u,w)² + ½d(v,w)² - ¼d(u,v)²
    double tolerance = 0.0;
};

/// Semiparallelogram law at the geodesic midpoint m of u and v.
inline Cat0Result cat0_check(const Potential1D& u, const Potential1D& v, const Potential1D& w) {
    const auto mid = connect(u, v, 2).at(0.5);
    const double duw = d2(u, w), dvw = d2(v, w), duv = d2(u, v), dmw = d2(mid, w);
    Cat0Result r;
    r.lhs = dmw * dmw;
    r.rhs = 0.5 * duw * duw + 0.5 * dvw * dvw - 0.25 * duv * duv;
    r.slack = r.rhs - r.lhs;
    r.tolerance = 1e-3 * std::max(r.rhs, 1.0);
    r.passes = r.slack >= -r.tolerance;
    return r;
}

}  // namespace mabuchi
