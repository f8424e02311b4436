#pragma once

// Weak geodesics between invariant potentials.
//
// In the invariant model the geodesic is linear in the dual potential:
// ψ_t = (1-t)ψ₀ + tψ₁, and u_t is recovered by the inverse dual map. The
// brute-force envelope of affine minorants is kept alongside as an
// independent construction of the same object.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mabuchi/legendre.hpp"
#include "mabuchi/potential.hpp"

namespace mabuchi {

inline constexpr double kEpsHessian = 1e-6;

class ExtensionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A geodesic sampled at uniform times on [t_begin, t_end], stored through its
/// dual representation ψ_t = ψ(0) + t·(ψ₁ - ψ₀).
class GeodesicPath {
public:
    GeodesicPath(Potential1D origin, Potential1D dual_origin, Potential1D dual_rate, double t_begin, double t_end,
                 std::size_t intervals)
        : origin_(std::move(origin)),
          dual_origin_(std::move(dual_origin)),
          dual_rate_(std::move(dual_rate)),
          t_begin_(t_begin),
          t_end_(t_end) {
        if (intervals < 2) throw std::invalid_argument("GeodesicPath: need at least two time intervals");
        if (!(t_end > t_begin)) throw std::invalid_argument("GeodesicPath: empty time interval");
        times_.resize(intervals + 1);
        for (std::size_t k = 0; k <= intervals; ++k)
            times_[k] = t_begin + (t_end - t_begin) * static_cast<double>(k) / static_cast<double>(intervals);
        slices_.reserve(times_.size());
        for (double t : times_) slices_.push_back(at(t));

        const auto at_origin = periodic_conjugate(dual_origin_);
        const PeriodicSpline rate(dual_rate_);
        tangent_.resize(origin_.size());
        for (std::size_t j = 0; j < tangent_.size(); ++j) tangent_[j] = -rate.value(at_origin.argmin[j]);
    }

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<Potential1D>& slices() const noexcept { return slices_; }
    const Potential1D& front() const { return slices_.front(); }
    const Potential1D& back() const { return slices_.back(); }
    const Potential1D& origin() const noexcept { return origin_; }
    double t_begin() const noexcept { return t_begin_; }
    double t_end() const noexcept { return t_end_; }
    double time_step() const noexcept { return times_[1] - times_[0]; }

    /// ψ at t = 0 and its rate of change; φ*_t = p²/2 + ψ_t.
    const Potential1D& dual_origin() const noexcept { return dual_origin_; }
    const Potential1D& dual_rate() const noexcept { return dual_rate_; }
    Potential1D dual_at(double t) const {
        Potential1D psi = dual_origin_;
        return psi.axpy(t, dual_rate_);
    }
    LegendreProfile dual_profile(double t) const { return to_profile(dual_at(t)); }

    Potential1D at(double t) const { return periodic_conjugate(dual_at(t)).dual; }

    /// d/dt u_t at t = 0, from the dual closed form (ψ₀ - ψ₁)(x + u₀'(x)).
    const std::vector<double>& initial_tangent() const noexcept { return tangent_; }

private:
    Potential1D origin_;
    Potential1D dual_origin_;
    Potential1D dual_rate_;
    double t_begin_;
    double t_end_;
    std::vector<double> times_;
    std::vector<Potential1D> slices_;
    std::vector<double> tangent_;
};

namespace detail {

inline void require_kahler(const Potential1D& u, const char* what) {
    if (!is_kahler(u)) throw std::domain_error(std::string(what) + ": endpoint is not Kähler");
}

inline void require_same_grid(const Potential1D& a, const Potential1D& b, const char* what) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace detail

inline GeodesicPath connect(const Potential1D& u0, const Potential1D& u1, std::size_t intervals = 64) {
    detail::require_same_grid(u0, u1, "connect");
    detail::require_kahler(u0, "connect");
    detail::require_kahler(u1, "connect");
    auto psi0 = periodic_conjugate(u0).dual;
    auto rate = periodic_conjugate(u1).dual;
    rate -= psi0;
    return GeodesicPath(u0, std::move(psi0), std::move(rate), 0.0, 1.0, intervals);
}

/// Initial tangent of the geodesic from u0 to u1 without tabulating the path.
inline std::vector<double> initial_tangent(const Potential1D& u0, const Potential1D& u1) {
    detail::require_same_grid(u0, u1, "initial_tangent");
    detail::require_kahler(u0, "initial_tangent");
    detail::require_kahler(u1, "initial_tangent");
    const auto psi0 = periodic_conjugate(u0).dual;
    const auto psi1 = periodic_conjugate(u1).dual;
    const auto back = periodic_conjugate(psi0);
    const PeriodicSpline diff(psi0 - psi1);
    std::vector<double> v(u0.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = diff.value(back.argmin[j]);
    return v;
}

inline const std::vector<double>& initial_tangent(const GeodesicPath& path) { return path.initial_tangent(); }

/// Slice at time t of the upper envelope of affine functions a + αt + px that
/// lie below both lifts on their windows. Brute force over every chord slope of
/// the two piecewise-linear lifts, O(N²) in the window size.
inline Potential1D envelope_oracle(const Potential1D& u0, const Potential1D& u1, double t) {
    detail::require_same_grid(u0, u1, "envelope_oracle");
    detail::require_kahler(u0, "envelope_oracle");
    detail::require_kahler(u1, "envelope_oracle");
    const auto& g = u0.grid();
    const double h = g.spacing();
    const std::size_t n = g.size();

    double slope = 0.0;
    for (const auto* u : {&u0, &u1})
        for (double d : forward_difference(*u)) slope = std::max(slope, std::abs(d));
    const double p_lo = -slope - 4.0 * h, p_hi = 1.0 + slope + 4.0 * h;
    const auto reach = static_cast<std::ptrdiff_t>(std::ceil((2.0 * slope + 2.0) * static_cast<double>(n))) + 8;

    std::vector<double> xs, f0, f1;
    for (std::ptrdiff_t i = -reach; i <= reach + static_cast<std::ptrdiff_t>(n); ++i) {
        const double x = static_cast<double>(i) * h;
        xs.push_back(x);
        f0.push_back(0.5 * x * x + u0.at(i));
        f1.push_back(0.5 * x * x + u1.at(i));
    }

    std::vector<double> ps;
    for (const auto* f : {&f0, &f1})
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            const double p = ((*f)[i + 1] - (*f)[i]) / h;
            if (p >= p_lo && p <= p_hi) ps.push_back(p);
        }

    auto brute_conjugate = [&](const std::vector<double>& f, double p) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < xs.size(); ++i) best = std::max(best, p * xs[i] - f[i]);
        return best;
    };
    std::vector<double> dual(ps.size());
    for (std::size_t k = 0; k < ps.size(); ++k)
        dual[k] = (1.0 - t) * brute_conjugate(f0, ps[k]) + t * brute_conjugate(f1, ps[k]);

    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = g.node(static_cast<std::ptrdiff_t>(j));
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < ps.size(); ++k) best = std::max(best, ps[k] * x - dual[k]);
        out[j] = best - 0.5 * x * x;
    }
    return Potential1D(g, std::move(out));
}

// ---------------------------------------------------------------------------
// Subgeodesics

struct SubgeodesicCertificate {
    std::size_t rows = 0;       // interior time samples
    std::size_t cols = 0;       // grid nodes
    std::vector<double> slack;  // ü(1 + u'') - (u̇')², row-major over (t, x)
    double min_slack = 0.0;
    double min_time_convexity = 0.0;   // min ü
    double min_space_convexity = 0.0;  // min 1 + u''

    bool passes(double eps = kEpsHessian) const {
        return min_slack >= -eps && min_time_convexity >= -eps && min_space_convexity >= -eps;
    }
};

enum class TimeStencil { second_order, fourth_order };

/// Discrete joint-convexity test of W(t,x) = u_t(x) + x²/2 on a uniform time grid.
///
/// Time derivatives use centered stencils of the requested order (rows too close
/// to the ends for the wide stencil are skipped); space derivatives are the
/// compact second-order ones of ma_density.
inline SubgeodesicCertificate check_subgeodesic(const std::vector<double>& times,
                                                const std::vector<Potential1D>& slices,
                                                TimeStencil stencil = TimeStencil::fourth_order) {
    const std::size_t reach = stencil == TimeStencil::fourth_order ? 2 : 1;
    if (times.size() != slices.size() || times.size() < 2 * reach + 1)
        throw std::invalid_argument("check_subgeodesic: not enough slices for the time stencil");
    const double dt = times[1] - times[0];
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs((times[k] - times[k - 1]) - dt) > 1e-12 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("check_subgeodesic: time samples must be uniform");

    const std::size_t n = slices.front().size();
    const double h = slices.front().grid().spacing();
    SubgeodesicCertificate cert;
    cert.rows = times.size() - 2 * reach;
    cert.cols = n;
    cert.slack.resize(cert.rows * n);
    cert.min_slack = cert.min_time_convexity = cert.min_space_convexity = std::numeric_limits<double>::infinity();

    // Weights for the first and second time derivative at offsets -reach..reach.
    std::vector<double> w1, w2;
    if (stencil == TimeStencil::fourth_order) {
        w1 = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
        w2 = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
    } else {
        w1 = {-0.5, 0.0, 0.5};
        w2 = {1.0, -2.0, 1.0};
    }

    for (std::size_t k = reach; k + reach < times.size(); ++k) {
        const auto& cur = slices[k];
        const auto density = ma_density(cur);
        for (std::size_t j = 0; j < n; ++j) {
            const auto i = static_cast<std::ptrdiff_t>(j);
            double utt = 0.0, ut_right = 0.0, ut_left = 0.0;
            for (std::size_t m = 0; m < w1.size(); ++m) {
                const auto& s = slices[k + m - reach];
                utt += w2[m] * s[j];
                ut_right += w1[m] * s.at(i + 1);
                ut_left += w1[m] * s.at(i - 1);
            }
            utt /= dt * dt;
            const double utx = (ut_right - ut_left) / (2.0 * h * dt);
            const double slack = utt * density[j] - utx * utx;
            cert.slack[(k - reach) * n + j] = slack;
            cert.min_slack = std::min(cert.min_slack, slack);
            cert.min_time_convexity = std::min(cert.min_time_convexity, utt);
            cert.min_space_convexity = std::min(cert.min_space_convexity, density[j]);
        }
    }
    return cert;
}

inline SubgeodesicCertificate check_subgeodesic(const GeodesicPath& path) {
    return check_subgeodesic(path.times(), path.slices());
}

/// u_t = u + δ(t + t²/2)ρ on t_k = k/K.
inline std::vector<Potential1D> bump_family(const Potential1D& u, std::size_t center, double delta,
                                            std::size_t intervals = 64) {
    const auto rho = as_potential(bump(u.grid(), center));
    std::vector<Potential1D> out;
    out.reserve(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(intervals);
        Potential1D s = u;
        out.push_back(s.axpy(delta * (t + 0.5 * t * t), rho));
    }
    return out;
}

inline std::vector<double> uniform_times(std::size_t intervals) {
    std::vector<double> t(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) t[k] = static_cast<double>(k) / static_cast<double>(intervals);
    return t;
}

/// Largest δ = 2^{-k} ≤ 1 for which the bump family is a Kähler subgeodesic.
inline double subgeodesic_delta(const Potential1D& u, std::size_t center, std::size_t intervals = 64) {
    if (!is_kahler(u)) throw std::domain_error("subgeodesic_delta: potential is not Kähler");
    const auto times = uniform_times(intervals);
    for (double delta = 1.0; delta >= 1e-8; delta *= 0.5) {
        const auto family = bump_family(u, center, delta, intervals);
        if (!std::all_of(family.begin(), family.end(), [](const Potential1D& s) { return is_kahler(s); })) continue;
        if (check_subgeodesic(times, family).passes()) return delta;
    }
    throw std::runtime_error("subgeodesic_delta: no admissible delta >= 1e-8");
}

// ---------------------------------------------------------------------------
// Extendability

inline constexpr double kExtensionCap = 1e3;

namespace detail {

// min_k of the second difference of (1+ε)φ₀* - εφ₁*; the quadratic part contributes exactly one.
inline double dual_convexity(const std::vector<double>& d2_psi0, const std::vector<double>& d2_psi1, double eps) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < d2_psi0.size(); ++k)
        worst = std::min(worst, 1.0 + (1.0 + eps) * d2_psi0[k] - eps * d2_psi1[k]);
    return worst;
}

}  // namespace detail

/// Largest ε such that (1+ε)φ₀* - εφ₁* stays convex, i.e. the geodesic extends
/// to [-ε, 1]. Bisection to relative tolerance 1e-4; +∞ once ε = 1e3 passes.
inline double max_extension(const Potential1D& u0, const Potential1D& u1) {
    detail::require_same_grid(u0, u1, "max_extension");
    detail::require_kahler(u0, "max_extension");
    detail::require_kahler(u1, "max_extension");
    const auto d0 = second_difference(periodic_conjugate(u0).dual);
    const auto d1 = second_difference(periodic_conjugate(u1).dual);
    auto convex = [&](double eps) { return detail::dual_convexity(d0, d1, eps) >= 0.0; };
    if (convex(kExtensionCap)) return std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = kExtensionCap;
    while (hi - lo > 1e-4 * hi) {
        const double mid = 0.5 * (lo + hi);
        (convex(mid) ? lo : hi) = mid;
    }
    return lo;
}

/// The backward slice at t = -ε obtained from the dual combination (1+ε)ψ₀ - εψ₁.
/// Beyond the extension threshold the combination is not convex and the inverse
/// map silently replaces it by its convex envelope.
inline Potential1D extension_slice(const Potential1D& u0, const Potential1D& u1, double eps) {
    detail::require_same_grid(u0, u1, "extension_slice");
    auto psi = periodic_conjugate(u0).dual;
    psi *= 1.0 + eps;
    psi.axpy(-eps, periodic_conjugate(u1).dual);
    return periodic_conjugate(psi).dual;
}

/// sup-norm gap between u0 and the geodesic from `candidate` to u1 evaluated at
/// the time where u0 should sit if `candidate` were the slice at t = -ε.
inline double extension_defect(const Potential1D& u0, const Potential1D& u1, const Potential1D& candidate, double eps) {
    const double s = eps / (1.0 + eps);
    auto psi = periodic_conjugate(candidate).dual;
    psi *= 1.0 - s;
    psi.axpy(s, periodic_conjugate(u1).dual);
    return sup_distance(periodic_conjugate(psi).dual, u0);
}

struct ObstructionReport {
    bool nonnegative = false;  // candidate >= -tolerance everywhere
    double min_value = 0.0;
    double sup_value = 0.0;
    double growth_ratio = 0.0;  // sup candidate / (ε · sup(-u1))
    double tolerance = 0.0;
};

/// With u0 = 0 and u1 <= 0, any slice at t = -ε of a geodesic extension is
/// nonnegative by t-convexity, and its supremum is at least ε·sup(-u1).
inline ObstructionReport verify_extension_obstruction(const Potential1D& u0, const Potential1D& u1,
                                                      const Potential1D& candidate, double eps) {
    if (sup_distance(u0, Potential1D(u0.grid())) > 1e-12)
        throw std::invalid_argument("verify_extension_obstruction: requires u0 = 0");
    if (u1.max() > 1e-12) throw std::invalid_argument("verify_extension_obstruction: requires u1 <= 0");
    if (!(eps > 0.0)) throw std::invalid_argument("verify_extension_obstruction: requires eps > 0");
    ObstructionReport r;
    r.tolerance = u0.grid().spacing();
    r.min_value = candidate.min();
    r.sup_value = candidate.max();
    r.nonnegative = r.min_value >= -r.tolerance;
    const double depth = -u1.min();
    r.growth_ratio = depth > 0.0 ? r.sup_value / (eps * depth) : std::numeric_limits<double>::infinity();
    return r;
}

/// Concatenation of the geodesic u0 -> u1 with its mirror u0 -> v_{-1},
/// where the mirror dual endpoint is 2ψ₀ - ψ₁. Samples `intervals` steps per half.
inline GeodesicPath mirror_concat(const Potential1D& u0, const Potential1D& u1, std::size_t intervals = 64) {
    const double eps = max_extension(u0, u1);
    if (eps < 1.0)
        throw ExtensionError("mirror_concat: geodesic extends only to t = -" + std::to_string(eps) +
                             ", cannot be continued to t = -1");
    auto psi0 = periodic_conjugate(u0).dual;
    auto rate = periodic_conjugate(u1).dual;
    rate -= psi0;
    return GeodesicPath(u0, std::move(psi0), std::move(rate), -1.0, 1.0, 2 * intervals);
}

// ---------------------------------------------------------------------------

/// CSV with header t,x,u, rows ordered by t then x.
inline void write_geodesic_csv(std::ostream& os, const GeodesicPath& path) {
    os << "t,x,u\n";
    os.precision(17);
    for (std::size_t k = 0; k < path.times().size(); ++k) {
        const auto& s = path.slices()[k];
        for (std::size_t j = 0; j < s.size(); ++j)
            os << path.times()[k] << ',' << s.grid().node(static_cast<std::ptrdiff_t>(j)) << ',' << s[j] << '\n';
    }
}

}  // namespace mabuchi
