#pragma once

// L² isometries of the invariant model: the Monge–Ampère flip, pullbacks by
// circle symmetries x ↦ s·x + a, and their compositions. Also the numerical
// tools that probe a map's differential: the isometry verifier, the (a, b, G)
// classifier, order preservation, tangent transport and the symmetry probe.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mabuchi/geodesic.hpp"
#include "mabuchi/metric.hpp"
#include "mabuchi/potential.hpp"
#include "mabuchi/random.hpp"

namespace mabuchi {

using PotentialMap = std::function<Potential1D(const Potential1D&)>;

/// 𝓘(u) = u - 2I(u).
inline Potential1D flip(const Potential1D& u) { return u - 2.0 * ma_energy(u); }

namespace detail {

// Shift a expressed in grid steps; nullopt when it is not a node.
inline std::optional<std::ptrdiff_t> node_shift(const CircleGrid& g, double a) {
    const double steps = a * static_cast<double>(g.size());
    const double r = std::round(steps);
    if (std::abs(steps - r) > 1e-9) return std::nullopt;
    return static_cast<std::ptrdiff_t>(r);
}

}  // namespace detail

/// u ↦ u∘f with f(x) = s·x + a. Node-aligned shifts permute values exactly;
/// other shifts fall back to linear interpolation.
inline Potential1D pullback(int s, double a, const Potential1D& u) {
    if (s != 1 && s != -1) throw std::invalid_argument("pullback: s must be +1 or -1");
    const auto& g = u.grid();
    std::vector<double> out(u.size());
    if (const auto k = detail::node_shift(g, a)) {
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = u.at(s * static_cast<std::ptrdiff_t>(j) + *k);
    } else {
        const double n = static_cast<double>(g.size());
        for (std::size_t j = 0; j < out.size(); ++j) {
            const double y = (s * g.node(static_cast<std::ptrdiff_t>(j)) + a) * n;
            const double fl = std::floor(y);
            const double w = y - fl;
            const auto i = static_cast<std::ptrdiff_t>(fl);
            out[j] = (1.0 - w) * u.at(i) + w * u.at(i + 1);
        }
    }
    return Potential1D(g, std::move(out));
}

// ---------------------------------------------------------------------------

struct Flip {};
struct Pullback {
    int sign = 1;
    double shift = 0.0;
};
using IsometryStep = std::variant<Flip, Pullback>;

/// A composition of flips and pullbacks. Steps are stored in application order.
class IsometryMap {
public:
    IsometryMap() = default;
    explicit IsometryMap(std::vector<IsometryStep> steps) : steps_(std::move(steps)) {
        for (const auto& s : steps_)
            if (const auto* p = std::get_if<Pullback>(&s); p && p->sign != 1 && p->sign != -1)
                throw std::invalid_argument("IsometryMap: pullback sign must be +1 or -1");
    }

    static IsometryMap identity() { return IsometryMap(); }
    static IsometryMap make_flip() { return IsometryMap({Flip{}}); }
    static IsometryMap make_pullback(int s, double a) { return IsometryMap({Pullback{s, a}}); }

    /// outer ∘ inner: inner acts first.
    static IsometryMap compose(const IsometryMap& outer, const IsometryMap& inner) {
        auto steps = inner.steps_;
        steps.insert(steps.end(), outer.steps_.begin(), outer.steps_.end());
        return IsometryMap(std::move(steps));
    }

    /// Parses `identity`, `flip`, `pullback:s,a` and `compose:A/B` (= A∘B, nesting allowed on the right).
    static IsometryMap parse(const std::string& text) {
        if (text == "identity" || text == "id") return identity();
        if (text == "flip") return make_flip();
        if (text.rfind("pullback:", 0) == 0) {
            const auto body = text.substr(9);
            const auto comma = body.find(',');
            if (comma == std::string::npos) throw std::invalid_argument("malformed map: " + text);
            try {
                std::size_t used = 0;
                const int s = std::stoi(body.substr(0, comma), &used);
                if (used != comma) throw std::invalid_argument("");
                const auto tail = body.substr(comma + 1);
                const double a = std::stod(tail, &used);
                if (used != tail.size()) throw std::invalid_argument("");
                return make_pullback(s, a);
            } catch (const std::logic_error&) {
                throw std::invalid_argument("malformed map: " + text);
            }
        }
        if (text.rfind("compose:", 0) == 0) {
            const auto body = text.substr(8);
            const auto slash = body.find('/');
            if (slash == std::string::npos) throw std::invalid_argument("malformed map: " + text);
            return compose(parse(body.substr(0, slash)), parse(body.substr(slash + 1)));
        }
        throw std::invalid_argument("unknown map: " + text);
    }

    Potential1D operator()(const Potential1D& u) const {
        Potential1D v = u;
        for (const auto& s : steps_) {
            if (std::holds_alternative<Flip>(s)) v = flip(v);
            else {
                const auto& p = std::get<Pullback>(s);
                v = pullback(p.sign, p.shift, v);
            }
        }
        return v;
    }

    const std::vector<IsometryStep>& steps() const noexcept { return steps_; }

    std::size_t flip_count() const {
        return static_cast<std::size_t>(
            std::count_if(steps_.begin(), steps_.end(), [](const auto& s) { return std::holds_alternative<Flip>(s); }));
    }

    /// Expected diffeomorphism: pullbacks compose contravariantly, so the last
    /// applied step's point map acts first.
    double expected_g(double x) const {
        for (auto it = steps_.rbegin(); it != steps_.rend(); ++it)
            if (const auto* p = std::get_if<Pullback>(&*it)) x = p->sign * x + p->shift;
        x -= std::floor(x);
        return x;
    }

    /// The pullback part alone; for an even number of flips this is the same map.
    IsometryMap without_flips() const {
        std::vector<IsometryStep> steps;
        for (const auto& s : steps_)
            if (std::holds_alternative<Pullback>(s)) steps.push_back(s);
        return IsometryMap(std::move(steps));
    }

    /// Expected b: zero without flips, 2 otherwise (flip ∘ flip is the identity).
    double expected_b() const { return flip_count() % 2 == 0 ? 0.0 : 2.0; }

    /// True when some pullback needs interpolation on `grid`.
    bool interpolates(const CircleGrid& grid) const {
        for (const auto& s : steps_)
            if (const auto* p = std::get_if<Pullback>(&s); p && !detail::node_shift(grid, p->shift)) return true;
        return false;
    }

    std::string name() const {
        if (steps_.empty()) return "identity";
        std::ostringstream os;
        for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
            if (it != steps_.rbegin()) os << " o ";
            if (std::holds_alternative<Flip>(*it)) os << "flip";
            else {
                const auto& p = std::get<Pullback>(*it);
                os << "pullback(" << p.sign << ',' << p.shift << ')';
            }
        }
        return os.str();
    }

    operator PotentialMap() const {  // NOLINT: implicit by design
        return [self = *this](const Potential1D& u) { return self(u); };
    }

private:
    std::vector<IsometryStep> steps_;
};

// ---------------------------------------------------------------------------
// Differential

/// Probe step that keeps v ± εξ Kähler: min(1e-4/‖ξ‖∞, ¼·min m_v / max|ξ''|).
inline double probe_step(const Potential1D& v, const Potential1D& xi) {
    const double sup_xi = std::max(std::abs(xi.max()), std::abs(xi.min()));
    double eps = sup_xi > 0.0 ? 1e-4 / sup_xi : 1e-4;
    const auto m = ma_density(v);
    double curv = 0.0;
    for (double d : second_difference(xi)) curv = std::max(curv, std::abs(d));
    if (curv > 0.0) eps = std::min(eps, 0.25 * *std::min_element(m.begin(), m.end()) / curv);
    return eps;
}

/// F_*(v)ξ by the symmetric difference (F(v+εξ) - F(v-εξ)) / 2ε.
inline Potential1D differential(const PotentialMap& F, const Potential1D& v, const Potential1D& xi) {
    const double eps = probe_step(v, xi);
    Potential1D plus = v, minus = v;
    plus.axpy(eps, xi);
    minus.axpy(-eps, xi);
    auto d = F(plus) - F(minus);
    return d *= 0.5 / eps;
}

inline double weighted_l2_sq(const Potential1D& xi, const Potential1D& v) {
    const auto m = ma_density(v);
    double s = 0.0;
    for (std::size_t j = 0; j < xi.size(); ++j) s += xi[j] * xi[j] * m[j];
    return v.grid().spacing() * s;
}

inline double isometry_tolerance(const CircleGrid& grid, double c = 1.0) {
    const double h = grid.spacing();
    return 1e-6 + c * h * h;
}

struct IsometryCheck {
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool passes = false;
};

/// Max relative gap between ∫|ξ|²m_v and ∫|F_*ξ|²m_{F(v)} over random (v, ξ).
inline IsometryCheck verify_isometry(const PotentialMap& F, const CircleGrid& grid, std::size_t trials,
                                     std::uint64_t seed = 1) {
    Rng rng(seed);
    IsometryCheck r;
    r.tolerance = isometry_tolerance(grid);
    for (std::size_t k = 0; k < trials; ++k) {
        const auto v = random_kahler(grid, rng);
        const auto xi = random_tangent(grid, rng);
        const double before = weighted_l2_sq(xi, v);
        const double after = weighted_l2_sq(differential(F, v, xi), F(v));
        r.max_residual = std::max(r.max_residual, std::abs(after - before) / before);
    }
    r.passes = r.max_residual <= r.tolerance;
    return r;
}

// ---------------------------------------------------------------------------
// Classifier

inline constexpr std::size_t kClassifierCenters = 16;

struct ClassifierReport {
    double a_hat = 0.0;
    double b_hat = 0.0;       // from constant probes: F_*1 = a - b
    double b_bump = 0.0;      // from the offsets of the bump fits
    std::vector<std::pair<double, double>> g_samples;  // x ↦ G(x)
    double residual = 0.0;    // worst fit residual over probes and base potentials
    double g_consistency = 0.0;  // max circle distance between G estimates across bases
    bool conclusive = false;
    std::string note;

    int a_rounded() const { return a_hat >= 0.0 ? 1 : -1; }
    double b_rounded() const { return std::abs(b_hat) <= std::abs(b_hat - 2.0 * a_rounded()) ? 0.0 : 2.0 * a_rounded(); }
};

namespace detail {

struct BumpFit {
    std::size_t center = 0;
    double scale = 0.0;   // A
    double offset = 0.0;  // B
    double residual = 0.0;
};

// Best least-squares fit R ≈ A·ρ_c + B over every candidate center c.
inline BumpFit fit_bump(const Potential1D& response) {
    const auto& g = response.grid();
    const std::size_t n = g.size();
    const auto rho = bump(g, 0).values;  // ρ_c(x_j) = rho[(j - c) mod n]
    double sr = 0.0, srr = 0.0;
    for (double x : rho) {
        sr += x;
        srr += x * x;
    }
    double sy = 0.0;
    for (std::size_t j = 0; j < n; ++j) sy += response[j];
    const double nn = static_cast<double>(n);
    const double det = nn * srr - sr * sr;

    BumpFit best;
    best.residual = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
        double sry = 0.0;
        for (std::size_t j = 0; j < n; ++j) sry += rho[(j + n - c) % n] * response[j];
        const double A = (nn * sry - sr * sy) / det;
        const double B = (srr * sy - sr * sry) / det;
        double worst = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            worst = std::max(worst, std::abs(response[j] - A * rho[(j + n - c) % n] - B));
        if (worst < best.residual) best = BumpFit{c, A, B, worst};
    }
    return best;
}

struct SingleBase {
    double a = 0.0, b_const = 0.0, b_bump = 0.0, residual = 0.0;
    std::vector<std::pair<double, double>> g;
};

inline SingleBase classify_at(const PotentialMap& F, const Potential1D& u) {
    const auto& grid = u.grid();
    const std::size_t n = grid.size();
    SingleBase out;
    const auto one = differential(F, u, Potential1D(grid, 1.0));
    double mean = 0.0;
    for (double x : one.values()) mean += x;
    mean /= static_cast<double>(n);
    const auto m = ma_density(u);

    double a_sum = 0.0, b_sum = 0.0;
    for (std::size_t k = 0; k < kClassifierCenters; ++k) {
        const std::size_t x0 = k * n / kClassifierCenters;
        const auto rho = as_potential(bump(grid, x0));
        double kappa = 0.0;
        for (std::size_t j = 0; j < n; ++j) kappa += rho[j] * m[j];
        kappa *= grid.spacing();
        const auto fit = fit_bump(differential(F, u, rho));
        a_sum += fit.scale;
        b_sum += -fit.offset / kappa;
        out.residual = std::max(out.residual, fit.residual);
        // The response is a·ρ_{x0}∘G, a bump centered at G⁻¹(x0).
        out.g.emplace_back(grid.node(static_cast<std::ptrdiff_t>(fit.center)), grid.node(static_cast<std::ptrdiff_t>(x0)));
    }
    out.a = a_sum / static_cast<double>(kClassifierCenters);
    out.b_bump = b_sum / static_cast<double>(kClassifierCenters);
    out.b_const = out.a - mean;
    return out;
}

}  // namespace detail

/// Estimates (a, b, G) in F_*(u)ξ = a·ξ∘G - b·∫ξ m_u from constant and bump
/// probes at two base potentials and a vertical shift of the first.
inline ClassifierReport classify(const PotentialMap& F, const CircleGrid& grid, std::uint64_t seed = 1,
                                 double residual_tol = 1e-4) {
    Rng rng(seed);
    const auto u1 = random_kahler(grid, rng, 0.3);
    const auto u2 = random_kahler(grid, rng, 0.3);
    const std::vector<detail::SingleBase> runs = {detail::classify_at(F, u1), detail::classify_at(F, u2),
                                                  detail::classify_at(F, u1 + 0.37)};
    ClassifierReport r;
    r.g_samples = runs.front().g;
    for (const auto& s : runs) {
        r.a_hat += s.a / static_cast<double>(runs.size());
        r.b_hat += s.b_const / static_cast<double>(runs.size());
        r.b_bump += s.b_bump / static_cast<double>(runs.size());
        r.residual = std::max(r.residual, s.residual);
        for (std::size_t k = 0; k < s.g.size(); ++k)
            r.g_consistency = std::max(r.g_consistency, CircleGrid::distance(s.g[k].first, r.g_samples[k].first));
    }
    double spread = 0.0;
    for (const auto& s : runs) spread = std::max({spread, std::abs(s.a - r.a_hat), std::abs(s.b_const - r.b_hat)});

    std::ostringstream note;
    bool ok = true;
    if (std::abs(std::abs(r.a_hat) - 1.0) > 0.05) {
        ok = false;
        note << "a_hat not within 0.05 of +-1; ";
    }
    if (std::abs(r.b_hat - r.b_rounded()) > 0.05 || std::abs(r.b_bump - r.b_hat) > 0.05) {
        ok = false;
        note << "b_hat not within 0.05 of {0, 2a}; ";
    }
    if (r.residual > residual_tol) {
        ok = false;
        note << "probe residual above threshold; ";
    }
    if (r.g_consistency > 0.5 * grid.spacing() || spread > 0.05) {
        ok = false;
        note << "estimates differ across base potentials; ";
    }
    r.conclusive = ok;
    note << "sign of G*omega not resolvable in one real dimension";
    r.note = note.str();
    return r;
}

// ---------------------------------------------------------------------------
// Order preservation

enum class CheckStatus { passed, failed, skipped };

inline const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::passed: return "PASS";
        case CheckStatus::failed: return "FAIL";
        default: return "SKIP";
    }
}

struct MonotonicityResult {
    CheckStatus status = CheckStatus::skipped;
    double worst_order = 0.0;  // max of F(u) - F(v) over pairs u <= v
    double worst_shift = 0.0;  // max |F(u + c) - F(u) - c|
    std::string note;
};

/// F(u) <= F(v) for ordered pairs and F(u + c) = F(u) + c, without the b = 0 gate.
inline MonotonicityResult check_order_preservation(const PotentialMap& F, const CircleGrid& grid, std::size_t pairs = 50,
                                                   std::uint64_t seed = 2) {
    Rng rng(seed);
    std::uniform_real_distribution<double> shift(-1.0, 1.0), lift(0.0, 0.5);
    MonotonicityResult r;
    r.worst_order = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pairs; ++k) {
        const auto u = random_kahler(grid, rng);
        auto v = random_kahler(grid, rng);
        v += (u - v).max() + lift(rng);
        const auto fu = F(u);
        r.worst_order = std::max(r.worst_order, (fu - F(v)).max());
        const double c = shift(rng);
        r.worst_shift = std::max(r.worst_shift, sup_distance(F(u + c), fu + c));
    }
    r.status = (r.worst_order <= 1e-10 && r.worst_shift <= 1e-10) ? CheckStatus::passed : CheckStatus::failed;
    return r;
}

/// Order preservation for maps whose classifier reports b = 0; others are skipped.
inline MonotonicityResult monotonicity_check(const PotentialMap& F, const CircleGrid& grid, std::size_t pairs = 50,
                                             std::uint64_t seed = 2) {
    const auto report = classify(F, grid, seed);
    if (!report.conclusive || report.b_rounded() != 0.0) {
        MonotonicityResult r;
        r.note = "skipped: requires b = 0 (b_hat = " + std::to_string(report.b_hat) + ")";
        return r;
    }
    return check_order_preservation(F, grid, pairs, seed);
}

// ---------------------------------------------------------------------------
// Tangent transport

struct TransportResult {
    double tangent_residual = 0.0;  // sup |u̇₀∘G - (d/dt F(u_t))₀|
    double inf_residual = 0.0;      // |inf(F(u1) - F(u0)) - inf(u1 - u0)|
};

inline TransportResult tangent_transport_check(const IsometryMap& F, const Potential1D& u0, const Potential1D& u1) {
    if (F.flip_count() % 2 != 0) throw std::invalid_argument("tangent_transport_check: requires b = 0");
    const auto& g = u0.grid();
    const auto v = initial_tangent(u0, u1);
    const auto moved = initial_tangent(F(u0), F(u1));
    // v∘G is the pullback of the tangent field by the same point map.
    const auto v_g = F.without_flips()(Potential1D(g, v));
    TransportResult r;
    for (std::size_t j = 0; j < v.size(); ++j) r.tangent_residual = std::max(r.tangent_residual, std::abs(v_g[j] - moved[j]));
    r.inf_residual = std::abs((F(u1) - F(u0)).min() - (u1 - u0).min());
    return r;
}

// ---------------------------------------------------------------------------
// Symmetry probe

struct ReversalObstruction {
    double steepness = 0.0;       // s in u1 = u0 + s·v
    double threshold = 0.0;       // ε*(s) < 1
    bool blocked = false;         // mirror_concat refused the continuation to t = -1
    std::string message;
};

/// Steepens u1 = φ + s·v until the geodesic from φ cannot be continued to
/// t = -1. A symmetry reversing geodesics at φ would produce that continuation.
inline ReversalObstruction reversal_obstruction(const Potential1D& phi) {
    const auto& g = phi.grid();
    const auto v = Potential1D::sample(g, [](double x) { return std::cos(2.0 * kPi * x) / (4.0 * kPi * kPi); });
    ReversalObstruction r;
    for (int i = 1; i <= 40; ++i) {
        const double s = 0.025 * i;
        auto u1 = phi;
        u1.axpy(s, v);
        const auto m = ma_density(u1);
        if (*std::min_element(m.begin(), m.end()) < 0.02) break;
        const double eps = max_extension(phi, u1);
        if (eps < 0.9) {  // clear of the borderline ε* = 1
            r.steepness = s;
            r.threshold = eps;
            try {
                (void)mirror_concat(phi, u1, 4);
            } catch (const ExtensionError& e) {
                r.blocked = true;
                r.message = e.what();
            }
            return r;
        }
    }
    r.message = "no steep pair found before losing positivity";
    return r;
}

struct SymmetryVerdict {
    double fixed_residual = 0.0;       // sup |F(φ) - φ|
    double involution_residual = 0.0;  // sup |F(F(w)) - w| over φ and a perturbation
    double reversal_residual = 0.0;    // sup |F_*ξ + ξ| over ξ ∈ {cos 2πx, 1}
    double tolerance = 1e-6;
    std::vector<std::string> failed;   // names of violated conditions
    ReversalObstruction obstruction;

    bool is_symmetry() const { return failed.empty(); }
};

inline SymmetryVerdict symmetry_probe(const PotentialMap& F, const Potential1D& phi) {
    const auto& g = phi.grid();
    SymmetryVerdict r;
    r.fixed_residual = sup_distance(F(phi), phi);
    auto w = phi;
    w.axpy(0.01, Potential1D::sample(g, [](double x) { return std::sin(4.0 * kPi * x) / (16.0 * kPi * kPi); }));
    r.involution_residual = std::max(sup_distance(F(F(phi)), phi), sup_distance(F(F(w)), w));
    for (const auto& xi : {Potential1D::sample(g, [](double x) { return std::cos(2.0 * kPi * x); }), Potential1D(g, 1.0)}) {
        auto d = differential(F, phi, xi);
        d += xi;
        r.reversal_residual = std::max(r.reversal_residual, std::max(std::abs(d.max()), std::abs(d.min())));
    }
    if (r.fixed_residual > r.tolerance) r.failed.emplace_back("fixes_phi");
    if (r.involution_residual > r.tolerance) r.failed.emplace_back("involution");
    if (r.reversal_residual > r.tolerance) r.failed.emplace_back("differential_is_minus_identity");
    r.obstruction = reversal_obstruction(phi);
    return r;
}

}  // namespace mabuchi
