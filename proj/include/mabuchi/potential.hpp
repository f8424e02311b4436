#pragma once

// Invariant Kähler potentials on the flat torus R^2/Z^2.
//
// A potential invariant under vertical translations depends on x only and is
// stored as periodic samples on a uniform grid of [0,1). Its Kähler form is
// (1 + u'') dx^dy and the total volume is normalized to one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mabuchi {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTolPos = 1e-10;

class CircleGrid {
public:
    explicit CircleGrid(std::size_t n = 1024) : n_(n) {
        if (n < 16) throw std::invalid_argument("CircleGrid: need at least 16 nodes");
    }

    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return 1.0 / static_cast<double>(n_); }
    double node(std::ptrdiff_t j) const noexcept { return static_cast<double>(j) * spacing(); }

    // Index modulo n, valid for negative j.
    std::size_t wrap(std::ptrdiff_t j) const noexcept {
        const auto n = static_cast<std::ptrdiff_t>(n_);
        const auto r = j % n;
        return static_cast<std::size_t>(r < 0 ? r + n : r);
    }

    // Periodic distance between two points of [0,1).
    static double distance(double a, double b) noexcept {
        double d = std::fmod(std::abs(a - b), 1.0);
        return std::min(d, 1.0 - d);
    }

    bool operator==(const CircleGrid&) const = default;

private:
    std::size_t n_;
};

class Potential1D {
public:
    Potential1D(CircleGrid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw std::invalid_argument("Potential1D: sample count does not match grid");
        for (double v : values_)
            if (!std::isfinite(v)) throw std::invalid_argument("Potential1D: non-finite sample");
    }

    explicit Potential1D(CircleGrid grid, double constant = 0.0)
        : grid_(grid), values_(grid.size(), constant) {}

    template <class F>
    static Potential1D sample(CircleGrid grid, F&& f) {
        std::vector<double> v(grid.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.node(static_cast<std::ptrdiff_t>(j)));
        return Potential1D(grid, std::move(v));
    }

    const CircleGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t j) const noexcept { return values_[j]; }
    double at(std::ptrdiff_t j) const noexcept { return values_[grid_.wrap(j)]; }

    double max() const { return *std::max_element(values_.begin(), values_.end()); }
    double min() const { return *std::min_element(values_.begin(), values_.end()); }

    Potential1D& operator+=(double c) {
        for (double& v : values_) v += c;
        return *this;
    }
    Potential1D& operator*=(double c) {
        for (double& v : values_) v *= c;
        return *this;
    }
    Potential1D& operator+=(const Potential1D& o) { return axpy(1.0, o); }
    Potential1D& operator-=(const Potential1D& o) { return axpy(-1.0, o); }

    // this += a * o
    Potential1D& axpy(double a, const Potential1D& o) {
        if (!(o.grid_ == grid_)) throw std::invalid_argument("Potential1D: grid mismatch");
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += a * o.values_[j];
        return *this;
    }

    friend Potential1D operator+(Potential1D a, double c) { return a += c; }
    friend Potential1D operator-(Potential1D a, double c) { return a += -c; }
    friend Potential1D operator*(double c, Potential1D a) { return a *= c; }
    friend Potential1D operator+(Potential1D a, const Potential1D& b) { return a += b; }
    friend Potential1D operator-(Potential1D a, const Potential1D& b) { return a -= b; }

private:
    CircleGrid grid_;
    std::vector<double> values_;
};

// sup_j |u_j - v_j|
inline double sup_distance(const Potential1D& u, const Potential1D& v) {
    double m = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) m = std::max(m, std::abs(u[j] - v[j]));
    return m;
}

// Periodic trapezoid rule, which on a uniform periodic grid is h * sum.
inline double integrate(const CircleGrid& grid, const std::vector<double>& f) {
    return grid.spacing() * std::accumulate(f.begin(), f.end(), 0.0);
}

inline std::vector<double> forward_difference(const Potential1D& u) {
    const double inv_h = 1.0 / u.grid().spacing();
    std::vector<double> d(u.size());
    for (std::size_t j = 0; j < u.size(); ++j)
        d[j] = (u.at(static_cast<std::ptrdiff_t>(j) + 1) - u[j]) * inv_h;
    return d;
}

inline std::vector<double> centered_difference(const Potential1D& u) {
    const double inv_2h = 0.5 / u.grid().spacing();
    std::vector<double> d(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const auto i = static_cast<std::ptrdiff_t>(j);
        d[j] = (u.at(i + 1) - u.at(i - 1)) * inv_2h;
    }
    return d;
}

// Compact second difference (u_{j+1} - 2u_j + u_{j-1}) / h^2, formed as a
// difference of forward differences so that its periodic sum telescopes.
inline std::vector<double> second_difference(const Potential1D& u) {
    const auto g = forward_difference(u);
    const double inv_h = 1.0 / u.grid().spacing();
    const std::size_t n = u.size();
    std::vector<double> d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = (g[j] - g[(j + n - 1) % n]) * inv_h;
    return d;
}

/// Monge–Ampère density 1 + D^2 u of the invariant Kähler form.
inline std::vector<double> ma_density(const Potential1D& u) {
    auto m = second_difference(u);
    for (double& v : m) v += 1.0;
    return m;
}

inline bool is_kahler(const Potential1D& u, double tol_pos = kTolPos) {
    const auto m = ma_density(u);
    return *std::min_element(m.begin(), m.end()) > tol_pos;
}

/// Monge–Ampère energy I(u) = ∫u - ½∫(u')².
///
/// The gradient term uses forward differences, which makes the discrete
/// first variation of I exactly ∫ξ·ma_density(u).
inline double ma_energy(const Potential1D& u) {
    const double h = u.grid().spacing();
    double mass = 0.0, dirichlet = 0.0;
    const auto g = forward_difference(u);
    for (std::size_t j = 0; j < u.size(); ++j) {
        mass += u[j];
        dirichlet += g[j] * g[j];
    }
    return h * mass - 0.5 * h * dirichlet;
}

// ---------------------------------------------------------------------------
// Bump profile

struct BumpProfile {
    CircleGrid grid;
    std::size_t center = 0;
    double inner_radius = 0.25;
    double floor = 0.0;  // β
    std::vector<double> values;
};

namespace detail {

inline double smootherstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

// Unnormalized radial profile as a function of the periodic distance d.
inline double raw_bump(double d) {
    constexpr double r0 = 0.25, r1 = 0.375;
    if (d <= 0.0) return 0.0;
    const double core = std::exp(-1.0 / (d * d));
    if (d <= r0) return core;
    const double outer = std::exp(-1.0 / (r0 * r0));
    const double s = smootherstep((d - r0) / (r1 - r0));
    return (1.0 - s) * core + s * outer;
}

// Maximum of raw_bump over [0, 1/2]; fixed dense sampling keeps it independent of the grid.
inline double raw_bump_max() {
    static const double m = [] {
        double best = 0.0;
        constexpr int samples = 1 << 16;
        for (int i = 0; i <= samples; ++i) best = std::max(best, raw_bump(0.5 * i / samples));
        return best;
    }();
    return m;
}

}  // namespace detail

/// ρ(d) = exp(-1/d²) near the center, blended on [1/4, 3/8] to the constant
/// exp(-16), then scaled so that its maximum is one.
inline double bump_value(double distance) {
    return detail::raw_bump(distance) / detail::raw_bump_max();
}

inline BumpProfile bump(const CircleGrid& grid, std::size_t center) {
    if (center >= grid.size()) throw std::out_of_range("bump: center outside grid");
    BumpProfile b{grid, center, 0.25, bump_value(0.375), std::vector<double>(grid.size())};
    for (std::size_t j = 0; j < grid.size(); ++j) {
        // Exact index distance avoids asymmetric rounding of x_j - x0.
        const std::size_t k = (j + grid.size() - center) % grid.size();
        const std::size_t dk = std::min(k, grid.size() - k);
        b.values[j] = bump_value(static_cast<double>(dk) * grid.spacing());
    }
    b.values[center] = 0.0;
    return b;
}

inline Potential1D as_potential(const BumpProfile& b) { return Potential1D(b.grid, b.values); }

/// Log-sum-exp regularized maximum: max(u,v) <= w <= max(u,v) + η log 2.
inline Potential1D smooth_max(const Potential1D& u, const Potential1D& v, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("smooth_max: eta must be positive");
    if (!(u.grid() == v.grid())) throw std::invalid_argument("smooth_max: grid mismatch");
    std::vector<double> w(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double m = std::max(u[j], v[j]);
        w[j] = m + eta * std::log(std::exp((u[j] - m) / eta) + std::exp((v[j] - m) / eta));
    }
    return Potential1D(u.grid(), std::move(w));
}

// ---------------------------------------------------------------------------
// Periodic cubic spline, used wherever a smooth interpolant of grid data is needed.

class PeriodicSpline {
public:
    PeriodicSpline(const CircleGrid& grid, std::vector<double> y)
        : grid_(grid), y_(std::move(y)), m_(y_.size()) {
        const std::size_t n = y_.size();
        const double h = grid_.spacing();
        std::vector<double> rhs(n);
        for (std::size_t j = 0; j < n; ++j)
            rhs[j] = 6.0 * (y_[(j + 1) % n] - 2.0 * y_[j] + y_[(j + n - 1) % n]) / (h * h);
        solve_cyclic(rhs);
    }

    explicit PeriodicSpline(const Potential1D& u) : PeriodicSpline(u.grid(), u.values()) {}

    double value(double x) const { return eval<0>(x); }
    double derivative(double x) const { return eval<1>(x); }
    double second_derivative(double x) const { return eval<2>(x); }

    // Second-derivative samples at the nodes.
    const std::vector<double>& moments() const noexcept { return m_; }

private:
    template <int order>
    double eval(double x) const {
        const std::size_t n = y_.size();
        const double h = grid_.spacing();
        const double s = x / h;
        const double fl = std::floor(s);
        const std::size_t j = grid_.wrap(static_cast<std::ptrdiff_t>(fl));
        const std::size_t k = (j + 1) % n;
        const double b = (s - fl) * h;  // x - x_j
        const double a = h - b;         // x_{j+1} - x
        const double mj = m_[j], mk = m_[k];
        if constexpr (order == 0) {
            return (mj * a * a * a + mk * b * b * b) / (6.0 * h) + (y_[j] - mj * h * h / 6.0) * a / h +
                   (y_[k] - mk * h * h / 6.0) * b / h;
        } else if constexpr (order == 1) {
            return (-mj * a * a + mk * b * b) / (2.0 * h) + (y_[k] - y_[j]) / h - (mk - mj) * h / 6.0;
        } else {
            return (mj * a + mk * b) / h;
        }
    }

    // Solves M_{j-1} + 4 M_j + M_{j+1} = rhs_j with periodic wraparound
    // (Sherman–Morrison on the cyclic tridiagonal system).
    void solve_cyclic(const std::vector<double>& rhs) {
        const std::size_t n = rhs.size();
        const double a = 1.0, b = 4.0, c = 1.0;
        const double gamma = -b;
        std::vector<double> diag(n, b);
        diag[0] = b - gamma;
        diag[n - 1] = b - a * c / gamma;
        auto thomas = [&](std::vector<double> d) {
            std::vector<double> cp(n), x(n);
            cp[0] = c / diag[0];
            d[0] /= diag[0];
            for (std::size_t i = 1; i < n; ++i) {
                const double den = diag[i] - a * cp[i - 1];
                cp[i] = c / den;
                d[i] = (d[i] - a * d[i - 1]) / den;
            }
            x[n - 1] = d[n - 1];
            for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - cp[i] * x[i + 1];
            return x;
        };
        const auto y = thomas(rhs);
        std::vector<double> u(n, 0.0);
        u[0] = gamma;
        u[n - 1] = c;
        const auto z = thomas(u);
        const double fact = (y[0] + a * y[n - 1] / gamma) / (1.0 + z[0] + a * z[n - 1] / gamma);
        for (std::size_t i = 0; i < n; ++i) m_[i] = y[i] - fact * z[i];
    }

    CircleGrid grid_;
    std::vector<double> y_;
    std::vector<double> m_;
};

// ---------------------------------------------------------------------------
// CSV: header "x,u", rows ascending in [0,1).

inline void write_potential_csv(std::ostream& os, const Potential1D& u) {
    os << "x,u\n" << std::setprecision(17);
    for (std::size_t j = 0; j < u.size(); ++j)
        os << u.grid().node(static_cast<std::ptrdiff_t>(j)) << ',' << u[j] << '\n';
}

inline void write_potential_csv(const std::string& path, const Potential1D& u) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_potential_csv(os, u);
}

inline Potential1D read_potential_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("potential csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,u") throw std::runtime_error("potential csv: expected header 'x,u'");
    std::vector<double> xs, us;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("potential csv: malformed row '" + line + "'");
        try {
            xs.push_back(std::stod(line.substr(0, comma)));
            us.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw std::runtime_error("potential csv: malformed row '" + line + "'");
        }
    }
    const std::size_t n = xs.size();
    if (n < 16) throw std::runtime_error("potential csv: need at least 16 rows");
    const double h = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(xs[j] - static_cast<double>(j) * h) > 1e-9 * h)
            throw std::runtime_error("potential csv: nodes are not uniformly spaced on [0,1)");
    }
    return Potential1D(CircleGrid(n), std::move(us));
}

inline Potential1D read_potential_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_potential_csv(is);
}

}  // namespace mabuchi
