#pragma once

// Legendre–Fenchel duality for equivariant convex lifts φ(x) = x²/2 + u(x).
//
// Two routes are provided:
//  * the exact conjugate of the piecewise-linear interpolant of sampled data,
//    computed in linear time from the lower convex hull (transform, biconjugate);
//  * a smooth periodic dual map built on a cubic spline (periodic_conjugate),
//    which the geodesic module uses because its output has clean second
//    differences.
//
// With φ* = p²/2 + ψ(p) the periodic part satisfies
//     ψ(p) = -min_y [ u(y) + (p - y)²/2 ],   u(x) = -min_p [ ψ(p) + (x - p)²/2 ],
// so the same operator maps potentials to dual potentials and back.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mabuchi/potential.hpp"

namespace mabuchi {

// Samples f(x_i) on x_i = (first + i) * spacing.
struct GridFunction {
    std::ptrdiff_t first = 0;
    double spacing = 1.0;
    std::vector<double> values;

    double node(std::size_t i) const { return static_cast<double>(first + static_cast<std::ptrdiff_t>(i)) * spacing; }
    std::size_t size() const noexcept { return values.size(); }
    std::ptrdiff_t last() const { return first + static_cast<std::ptrdiff_t>(values.size()) - 1; }
    bool contains(std::ptrdiff_t index) const { return index >= first && index <= last(); }
    double at_index(std::ptrdiff_t index) const { return values.at(static_cast<std::size_t>(index - first)); }
};

struct ConvexLift {
    Potential1D base;
    double half_width;
    GridFunction samples;
};

struct LegendreProfile {
    GridFunction samples;  // φ*(p_k)
    std::string source;
};

/// φ(x) = x²/2 + u(x) sampled on [-W, W].
inline ConvexLift lift(const Potential1D& u, double half_width = 3.0) {
    if (half_width < 2.0) throw std::invalid_argument("lift: window half-width must be at least 2");
    if (!is_kahler(u)) throw std::domain_error("lift: potential is not Kähler, its lift is not convex");
    const auto& g = u.grid();
    const auto reach = static_cast<std::ptrdiff_t>(std::ceil(half_width * static_cast<double>(g.size())));
    GridFunction f{-reach, g.spacing(), std::vector<double>(static_cast<std::size_t>(2 * reach + 1))};
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto j = f.first + static_cast<std::ptrdiff_t>(i);
        const double x = f.node(i);
        f.values[i] = 0.5 * x * x + u.at(j);
    }
    return ConvexLift{u, half_width, std::move(f)};
}

namespace detail {

// Indices of the lower convex hull of (x_i, f_i), Andrew's monotone chain.
inline std::vector<std::size_t> lower_hull(const GridFunction& f) {
    std::vector<std::size_t> hull;
    hull.reserve(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2], b = hull.back();
            // Remove b when it lies on or above the chord a-i.
            const double lhs = (f.values[b] - f.values[a]) * static_cast<double>(i - a);
            const double rhs = (f.values[i] - f.values[a]) * static_cast<double>(b - a);
            if (lhs >= rhs) hull.pop_back();
            else break;
        }
        hull.push_back(i);
    }
    return hull;
}

}  // namespace detail

/// Exact conjugate f*(p) = max_i (p x_i - f_i) of sampled data, evaluated on
/// p_k = (first + k) * spacing for k < count. Linear time in the input size:
/// hull vertices are scanned once while the sorted momenta advance.
/// Ties pick the smallest maximizing node.
inline GridFunction conjugate(const GridFunction& f, std::ptrdiff_t first, std::size_t count, double spacing) {
    if (f.size() < 2) throw std::invalid_argument("conjugate: need at least two samples");
    const auto hull = detail::lower_hull(f);
    std::vector<double> slopes(hull.size() - 1);
    for (std::size_t k = 0; k + 1 < hull.size(); ++k)
        slopes[k] = (f.values[hull[k + 1]] - f.values[hull[k]]) / (f.node(hull[k + 1]) - f.node(hull[k]));

    GridFunction out{first, spacing, std::vector<double>(count)};
    if (count == 0) return out;
    const double p_lo = out.node(0), p_hi = out.node(count - 1);
    if (p_lo < slopes.front() || p_hi > slopes.back())
        throw std::out_of_range("conjugate: window too small for the requested momentum range");

    std::size_t v = 0;  // current hull vertex
    for (std::size_t k = 0; k < count; ++k) {
        const double p = out.node(k);
        while (v < slopes.size() && slopes[v] < p) ++v;
        const std::size_t i = hull[v];
        out.values[k] = p * f.node(i) - f.values[i];
    }
    return out;
}

inline LegendreProfile transform(const ConvexLift& phi, double p_min = -1.0, double p_max = 2.0) {
    const double h = phi.samples.spacing;
    const auto first = static_cast<std::ptrdiff_t>(std::floor(p_min / h + 0.5));
    const auto last = static_cast<std::ptrdiff_t>(std::floor(p_max / h + 0.5));
    if (last < first) throw std::invalid_argument("transform: empty momentum range");
    return LegendreProfile{conjugate(phi.samples, first, static_cast<std::size_t>(last - first + 1), h), "lift"};
}

/// Convex envelope of sampled data on the same nodes: the biconjugate.
inline GridFunction biconjugate(const GridFunction& f) {
    const auto hull = detail::lower_hull(f);
    GridFunction out{f.first, f.spacing, std::vector<double>(f.size())};
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        const std::size_t a = hull[k], b = hull[k + 1];
        for (std::size_t i = a; i <= b; ++i) {
            const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
            out.values[i] = (1.0 - w) * f.values[a] + w * f.values[b];
        }
    }
    return out;
}

// max over k of |φ*(p_k + 1) - φ*(p_k) - p_k - 1/2| where both nodes lie in range.
inline double equivariance_defect(const LegendreProfile& prof, std::size_t period) {
    const auto& s = prof.samples;
    double worst = 0.0;
    for (std::size_t k = 0; k + period < s.size(); ++k) {
        const double p = s.node(k);
        worst = std::max(worst, std::abs(s.values[k + period] - s.values[k] - p - 0.5));
    }
    return worst;
}

inline void write_profile_csv(std::ostream& os, const LegendreProfile& prof) {
    os << "p,phi_star\n";
    os.precision(17);
    for (std::size_t k = 0; k < prof.samples.size(); ++k) os << prof.samples.node(k) << ',' << prof.samples.values[k] << '\n';
}

// ---------------------------------------------------------------------------
// Smooth periodic dual map

struct DualMap {
    Potential1D dual;           // ψ on the target grid
    std::vector<double> argmin;  // minimizing y for each target node (unwrapped)
};

/// ψ(q_k) = -min_y [ S(y) + (q_k - y)²/2 ], S the periodic cubic spline of f.
///
/// The global node minimizer comes from the lower hull of y²/2 + f(y); it is
/// then refined on the spline by safeguarded Newton inside the adjacent cells.
inline DualMap periodic_conjugate(const Potential1D& f) {
    const auto& g = f.grid();
    const std::size_t n = g.size();
    const double h = g.spacing();
    const PeriodicSpline spline(f);

    double max_slope = 0.0;
    for (double d : forward_difference(f)) max_slope = std::max(max_slope, std::abs(d));
    const auto reach = static_cast<std::ptrdiff_t>(std::ceil((1.1 * max_slope) / h)) + 4;

    GridFunction lifted{-reach, h, std::vector<double>(n + static_cast<std::size_t>(2 * reach))};
    for (std::size_t i = 0; i < lifted.size(); ++i) {
        const double y = lifted.node(i);
        lifted.values[i] = 0.5 * y * y + f.at(lifted.first + static_cast<std::ptrdiff_t>(i));
    }
    const auto hull = detail::lower_hull(lifted);
    std::vector<double> slopes(hull.size() - 1);
    for (std::size_t k = 0; k + 1 < hull.size(); ++k)
        slopes[k] = (lifted.values[hull[k + 1]] - lifted.values[hull[k]]) / (lifted.node(hull[k + 1]) - lifted.node(hull[k]));

    std::vector<double> out(n), arg(n);
    std::size_t v = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double q = g.node(static_cast<std::ptrdiff_t>(k));
        while (v < slopes.size() && slopes[v] < q) ++v;
        const double y_node = lifted.node(hull[v]);

        auto objective = [&](double y) { return spline.value(y) + 0.5 * (q - y) * (q - y); };
        auto slope = [&](double y) { return spline.derivative(y) + y - q; };

        double lo = y_node - h, hi = y_node + h;
        double y = y_node;
        if (slope(lo) <= 0.0 && slope(hi) >= 0.0) {
            for (int it = 0; it < 60; ++it) {
                const double d1 = slope(y);
                if (d1 < 0.0) lo = y;
                else hi = y;
                const double d2 = spline.second_derivative(y) + 1.0;
                double next = (d2 > 0.0) ? y - d1 / d2 : 0.5 * (lo + hi);
                if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                if (std::abs(next - y) <= 1e-15 * (1.0 + std::abs(y)) || hi - lo <= 1e-15) {
                    y = next;
                    break;
                }
                y = next;
            }
            if (objective(y) > objective(y_node)) y = y_node;
        }
        out[k] = -objective(y);
        arg[k] = y;
    }
    return DualMap{Potential1D(g, std::move(out)), std::move(arg)};
}

/// φ*(p) = p²/2 + ψ(p) tabulated on [p_min, p_max].
inline LegendreProfile to_profile(const Potential1D& psi, double p_min = -1.0, double p_max = 2.0,
                                  std::string source = "dual") {
    const double h = psi.grid().spacing();
    const auto first = static_cast<std::ptrdiff_t>(std::floor(p_min / h + 0.5));
    const auto last = static_cast<std::ptrdiff_t>(std::floor(p_max / h + 0.5));
    GridFunction s{first, h, std::vector<double>(static_cast<std::size_t>(last - first + 1))};
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double p = s.node(k);
        s.values[k] = 0.5 * p * p + psi.at(first + static_cast<std::ptrdiff_t>(k));
    }
    return LegendreProfile{std::move(s), std::move(source)};
}

}  // namespace mabuchi
