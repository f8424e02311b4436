#pragma once

// Holomorphy test for affine maps of the square torus ℂ/ℤ[i].
//
// A map g is holomorphic (anti-holomorphic) exactly when i∂∂̄(u∘g) = ±g*(i∂∂̄u)
// for all u. With i∂∂̄u = (Δu/2) dx∧dy and g*(dx∧dy) = det(Dg) dx∧dy, the test
// compares Δ(u∘g)/2 against ±det(Dg)·(Δu/2)∘g on torus harmonics.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mabuchi/potential.hpp"

namespace mabuchi {

/// Periodic m×m samples on [0,1)², index (i, j) ↔ (x, y) = (i/m, j/m).
class Potential2D {
public:
    explicit Potential2D(std::size_t m, double constant = 0.0) : m_(m), values_(m * m, constant) {
        if (m < 4) throw std::invalid_argument("Potential2D: grid too small");
    }

    template <class F>
    static Potential2D sample(std::size_t m, F&& f) {
        Potential2D u(m);
        const double h = u.spacing();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) u.values_[i * m + j] = f(static_cast<double>(i) * h, static_cast<double>(j) * h);
        for (double v : u.values_)
            if (!std::isfinite(v)) throw std::invalid_argument("Potential2D: non-finite sample");
        return u;
    }

    std::size_t size() const noexcept { return m_; }
    double spacing() const noexcept { return 1.0 / static_cast<double>(m_); }
    double operator()(std::ptrdiff_t i, std::ptrdiff_t j) const noexcept { return values_[wrap(i) * m_ + wrap(j)]; }
    double& ref(std::size_t i, std::size_t j) { return values_[i * m_ + j]; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t wrap(std::ptrdiff_t i) const noexcept {
        const auto m = static_cast<std::ptrdiff_t>(m_);
        return static_cast<std::size_t>(((i % m) + m) % m);
    }

    std::size_t m_;
    std::vector<double> values_;
};

/// Second-order data of u: Δu/2 (the i∂∂̄ density) and u_zz = (u_xx - u_yy - 2i·u_xy)/4.
struct DdbarField {
    Potential2D half_laplacian;
    Potential2D uzz_re;
    Potential2D uzz_im;
};

inline DdbarField ddbar(const Potential2D& u) {
    const std::size_t m = u.size();
    const double h = u.spacing(), inv_h2 = 1.0 / (h * h);
    DdbarField d{Potential2D(m), Potential2D(m), Potential2D(m)};
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            const auto i = static_cast<std::ptrdiff_t>(a), j = static_cast<std::ptrdiff_t>(b);
            const double c = u(i, j);
            const double uxx = (u(i + 1, j) - 2.0 * c + u(i - 1, j)) * inv_h2;
            const double uyy = (u(i, j + 1) - 2.0 * c + u(i, j - 1)) * inv_h2;
            const double uxy = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1)) * 0.25 * inv_h2;
            d.half_laplacian.ref(a, b) = 0.5 * (uxx + uyy);
            d.uzz_re.ref(a, b) = 0.25 * (uxx - uyy);
            d.uzz_im.ref(a, b) = -0.5 * uxy;
        }
    return d;
}

/// g(p) = A·p + t with A ∈ GL₂(ℤ).
struct TorusMap2D {
    std::array<int, 4> A{1, 0, 0, 1};  // row-major
    std::array<double, 2> t{0.0, 0.0};
    std::string name = "identity";

    TorusMap2D() = default;
    TorusMap2D(std::array<int, 4> a, std::array<double, 2> shift, std::string label)
        : A(a), t(shift), name(std::move(label)) {
        if (det() != 1 && det() != -1) throw std::invalid_argument("TorusMap2D: matrix must have determinant +-1");
    }

    int det() const noexcept { return A[0] * A[3] - A[1] * A[2]; }

    std::array<double, 2> operator()(double x, double y) const {
        return {A[0] * x + A[1] * y + t[0], A[2] * x + A[3] * y + t[1]};
    }

    static TorusMap2D translation(double a1, double a2) { return {{1, 0, 0, 1}, {a1, a2}, "translation"}; }
    static TorusMap2D rotation() { return {{-1, 0, 0, -1}, {0.0, 0.0}, "rotation"}; }          // z ↦ -z
    static TorusMap2D conjugation() { return {{1, 0, 0, -1}, {0.0, 0.0}, "conjugation"}; }     // z ↦ z̄
    static TorusMap2D shear() { return {{1, 1, 0, 1}, {0.0, 0.0}, "shear"}; }
    static TorusMap2D quarter_turn() { return {{0, -1, 1, 0}, {0.0, 0.0}, "quarter-turn"}; }  // z ↦ iz

    static TorusMap2D parse(const std::string& text) {
        if (text == "identity") return {};
        if (text == "rotation") return rotation();
        if (text == "conjugation") return conjugation();
        if (text == "shear") return shear();
        if (text == "quarter-turn") return quarter_turn();
        if (text.rfind("translation", 0) == 0) {
            if (text == "translation") return translation(0.3, 0.1);
            if (text[11] != ':') throw std::invalid_argument("malformed map: " + text);
            const auto body = text.substr(12);
            const auto comma = body.find(',');
            if (comma == std::string::npos) throw std::invalid_argument("malformed map: " + text);
            try {
                return translation(std::stod(body.substr(0, comma)), std::stod(body.substr(comma + 1)));
            } catch (const std::logic_error&) {
                throw std::invalid_argument("malformed map: " + text);
            }
        }
        throw std::invalid_argument("unknown torus map: " + text);
    }
};

/// outer ∘ inner.
inline TorusMap2D compose(const TorusMap2D& outer, const TorusMap2D& inner) {
    const auto& P = outer.A;
    const auto& Q = inner.A;
    std::array<int, 4> A{P[0] * Q[0] + P[1] * Q[2], P[0] * Q[1] + P[1] * Q[3], P[2] * Q[0] + P[3] * Q[2],
                         P[2] * Q[1] + P[3] * Q[3]};
    const auto t = outer(inner.t[0], inner.t[1]);
    return TorusMap2D(A, t, outer.name + " o " + inner.name);
}

enum class HolomorphySign { holomorphic = 1, antiholomorphic = -1, none = 0 };

inline const char* to_string(HolomorphySign s) {
    switch (s) {
        case HolomorphySign::holomorphic: return "+1";
        case HolomorphySign::antiholomorphic: return "-1";
        default: return "none";
    }
}

inline HolomorphySign operator*(HolomorphySign a, HolomorphySign b) {
    return static_cast<HolomorphySign>(static_cast<int>(a) * static_cast<int>(b));
}

/// How (Δu/2)∘g is evaluated: by the same five-point stencil applied to the
/// analytic probe at g(p) (consistent), or by the exact Laplacian (continuum).
enum class LaplacianReference { stencil, continuum };

struct ProbeResidual {
    int k = 0, l = 0;
    bool sine = false;
    double plus = 0.0;
    double minus = 0.0;
};

struct HolomorphyReport {
    HolomorphySign sign = HolomorphySign::none;
    double r_plus = 0.0;
    double r_minus = 0.0;
    double tolerance = 1e-3;
    std::vector<ProbeResidual> probes;
};

/// Probes cos and sin of 2π(kx + ly), |k|,|l| <= 2; residuals are relative to
/// the probe's own i∂∂̄ amplitude.
inline HolomorphyReport holomorphy_check(const TorusMap2D& g, std::size_t m = 128, double tol = 1e-3,
                                         LaplacianReference ref = LaplacianReference::stencil) {
    const double h = 1.0 / static_cast<double>(m);
    const double det = g.det();
    HolomorphyReport r;
    r.tolerance = tol;
    for (int k = -2; k <= 2; ++k)
        for (int l = -2; l <= 2; ++l) {
            if (k == 0 && l == 0) continue;
            for (bool sine : {false, true}) {
                auto u = [=](double x, double y) {
                    const double arg = 2.0 * kPi * (k * x + l * y);
                    return sine ? std::sin(arg) : std::cos(arg);
                };
                auto half_lap = [&](double x, double y) {
                    if (ref == LaplacianReference::continuum) return -2.0 * kPi * kPi * (k * k + l * l) * u(x, y);
                    return 0.5 * (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4.0 * u(x, y)) / (h * h);
                };
                const auto composed = Potential2D::sample(m, [&](double x, double y) {
                    const auto q = g(x, y);
                    return u(q[0], q[1]);
                });
                const auto lhs = ddbar(composed).half_laplacian;
                const double scale = 2.0 * kPi * kPi * (k * k + l * l);
                ProbeResidual pr{k, l, sine, 0.0, 0.0};
                for (std::size_t a = 0; a < m; ++a)
                    for (std::size_t b = 0; b < m; ++b) {
                        const auto q = g(static_cast<double>(a) * h, static_cast<double>(b) * h);
                        const double pulled = det * half_lap(q[0], q[1]);
                        const double val = lhs(static_cast<std::ptrdiff_t>(a), static_cast<std::ptrdiff_t>(b));
                        pr.plus = std::max(pr.plus, std::abs(val - pulled) / scale);
                        pr.minus = std::max(pr.minus, std::abs(val + pulled) / scale);
                    }
                r.r_plus = std::max(r.r_plus, pr.plus);
                r.r_minus = std::max(r.r_minus, pr.minus);
                r.probes.push_back(pr);
            }
        }
    if (r.r_plus <= tol && r.r_minus > tol) r.sign = HolomorphySign::holomorphic;
    else if (r.r_minus <= tol && r.r_plus > tol) r.sign = HolomorphySign::antiholomorphic;
    return r;
}

}  // namespace mabuchi
