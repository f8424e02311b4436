#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "mabuchi/geodesic.hpp"
#include "mabuchi/random.hpp"
#include "oracles.hpp"

using namespace mabuchi;

namespace {

using oracle::AnalyticGeodesic;
using oracle::Fn;

Potential1D cosine(const CircleGrid& g, double a) {
    return Potential1D::sample(g, [=](double x) { return a * std::cos(2.0 * kPi * x); });
}

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST(Connect, Preconditions) {
    const CircleGrid g(64);
    EXPECT_THROW(connect(Potential1D(g), cosine(g, 0.1)), std::domain_error);
    EXPECT_THROW(connect(Potential1D(g), Potential1D(g), 1), std::invalid_argument);
    EXPECT_THROW(connect(Potential1D(g), Potential1D(CircleGrid(32))), std::invalid_argument);
}

TEST(Connect, ConstantPath) {
    const CircleGrid g(256);
    const auto u = cosine(g, 0.02);
    const auto path = connect(u, u, 8);
    // Slices come back through the spline dual; the round trip is not bit-exact.
    for (const auto& s : path.slices()) EXPECT_LT(sup_distance(s, u), 1e-7);
    for (double v : path.initial_tangent()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Connect, ConstantShiftIsLinear) {
    const CircleGrid g(256);
    const auto u = cosine(g, 0.015);
    const auto path = connect(u, u + 0.3, 10);
    for (std::size_t k = 0; k < path.times().size(); ++k)
        EXPECT_LT(sup_distance(path.slices()[k], u + 0.3 * path.times()[k]), 1e-7);
    for (double v : path.initial_tangent()) EXPECT_NEAR(v, 0.3, 1e-12);
}

TEST(Connect, AgreesWithAnalyticOracle) {
    const CircleGrid g(1024);
    const Fn f1 = [](double x) { return 0.02 * std::cos(2.0 * kPi * x); };
    const Fn f0 = [](double x) { return 0.004 * std::sin(4.0 * kPi * x); };
    const AnalyticGeodesic oracle(f0, f1);
    const auto path = connect(Potential1D::sample(g, f0), Potential1D::sample(g, f1), 8);
    for (double t : {0.25, 0.5, 0.875}) {
        const auto slice = path.at(t);
        for (std::size_t j = 0; j < g.size(); j += 37)
            EXPECT_NEAR(slice[j], oracle.at(t, g.node(static_cast<std::ptrdiff_t>(j))), 1e-7) << "t=" << t << " j=" << j;
    }
}

TEST(Connect, RunningExampleMatchesEnvelopeOracle) {
    const CircleGrid g(1024);
    const auto u1 = cosine(g, 0.02);
    const auto path = connect(Potential1D(g), u1, 8);
    EXPECT_LE(sup_distance(path.at(0.5), envelope_oracle(Potential1D(g), u1, 0.5)), 5.0 * g.spacing());
}

TEST(Connect, BoundaryAttainmentAndConvexityInTime) {
    const CircleGrid g(512);
    Rng rng(31);
    for (int k = 0; k < 5; ++k) {
        const auto u0 = random_kahler(g, rng), u1 = random_kahler(g, rng);
        const auto path = connect(u0, u1, 32);
        EXPECT_LE(sup_distance(path.front(), u0), g.spacing());
        EXPECT_LE(sup_distance(path.back(), u1), g.spacing());
        const double dt = path.time_step();
        const auto& s = path.slices();
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            for (std::size_t j = 0; j < g.size(); ++j)
                ASSERT_GE((s[i + 1][j] - 2.0 * s[i][j] + s[i - 1][j]) / (dt * dt), -1e-8 / (dt * dt));
            for (double m : ma_density(s[i])) ASSERT_GE(m, 0.0);
        }
    }
}

TEST(Connect, GeodesicPassesCertificate) {
    const CircleGrid g(1024);
    const auto path = connect(Potential1D(g), cosine(g, 0.02));
    EXPECT_TRUE(check_subgeodesic(path).passes());
    Rng rng(2);
    const auto moderate = connect(random_kahler(g, rng, 0.3), random_kahler(g, rng, 0.3));
    EXPECT_TRUE(check_subgeodesic(moderate).passes());
}

TEST(InitialTangent, MatchesForwardDifference) {
    const CircleGrid g(1024);
    Rng rng(12);
    const auto u0 = random_kahler(g, rng), u1 = random_kahler(g, rng);
    const auto path = connect(u0, u1, 256);
    const double t1 = path.times()[1];
    const auto& v = path.initial_tangent();
    for (std::size_t j = 0; j < g.size(); ++j)
        EXPECT_NEAR(v[j], (path.slices()[1][j] - u0[j]) / t1, t1 + g.spacing());
    const auto w = initial_tangent(u0, u1);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(v[j], w[j], 1e-14);
}

TEST(InitialTangent, InfSupIdentities) {
    const CircleGrid g(1024);
    Rng rng(13);
    for (int k = 0; k < 20; ++k) {
        const auto u0 = random_kahler(g, rng), u1 = random_kahler(g, rng);
        const auto v = initial_tangent(u0, u1);
        const auto d = u1 - u0;
        EXPECT_NEAR(*std::min_element(v.begin(), v.end()), d.min(), 5.0 * g.spacing());
        EXPECT_NEAR(*std::max_element(v.begin(), v.end()), d.max(), 5.0 * g.spacing());
    }
}

TEST(EnvelopeOracle, TrivialFamilies) {
    const CircleGrid g(256);
    const auto u = cosine(g, 0.02);
    EXPECT_LT(sup_distance(envelope_oracle(u, u, 0.4), u), 1e-12);
    EXPECT_LT(sup_distance(envelope_oracle(u, u + 0.2, 0.5), u + 0.1), 1e-8);
}

TEST(EnvelopeOracle, GapShrinksUnderRefinement) {
    std::vector<double> gaps;
    for (std::size_t n : {256u, 512u}) {
        const CircleGrid g(n);
        const auto u0 = Potential1D::sample(g, [](double x) { return 0.01 * std::sin(2.0 * kPi * x); });
        const auto u1 = Potential1D::sample(g, [](double x) { return 0.005 * std::cos(4.0 * kPi * x); });
        gaps.push_back(sup_distance(connect(u0, u1, 4).at(0.3), envelope_oracle(u0, u1, 0.3)));
    }
    EXPECT_GE(gaps[0] / gaps[1], 1.8);
}

TEST(ComparisonPrinciple, OrderedEndpoints) {
    const CircleGrid g(512);
    Rng rng(14);
    const auto u0 = random_kahler(g, rng);
    const auto u1 = random_kahler(g, rng);
    auto w1 = random_kahler(g, rng);
    w1 += (u1 - w1).max();  // u1 <= w1
    const auto a = connect(u0, u1, 8), b = connect(u0, w1, 8);
    for (std::size_t k = 0; k < a.slices().size(); ++k) EXPECT_LE((a.slices()[k] - b.slices()[k]).max(), g.spacing());
}

TEST(Certificate, ConstantPathHasZeroSlack) {
    const CircleGrid g(128);
    const std::vector<Potential1D> slices(9, cosine(g, 0.01));
    const auto cert = check_subgeodesic(uniform_times(8), slices);
    EXPECT_NEAR(cert.min_slack, 0.0, 1e-6);
    EXPECT_TRUE(cert.passes());
}

TEST(Certificate, DetectsNonSubgeodesic) {
    const CircleGrid g(256);
    std::vector<Potential1D> slices;
    const auto times = uniform_times(32);
    for (double t : times) slices.push_back(cosine(g, 0.1 * t * t));
    const auto cert = check_subgeodesic(times, slices);
    EXPECT_FALSE(cert.passes());
    // Direct slack evaluation: ü(1+u'') - (u̇')² with ü = 0.2cos, u'' = -0.4π²t²cos, u̇' = -0.4πt·sin.
    double oracle = std::numeric_limits<double>::infinity();
    for (std::size_t k = 2; k + 2 < times.size(); ++k)
        for (int j = 0; j < 256; ++j) {
            const double t = times[k], x = j / 256.0, c = std::cos(2.0 * kPi * x), s = std::sin(2.0 * kPi * x);
            oracle = std::min(oracle, 0.2 * c * (1.0 - 0.4 * kPi * kPi * t * t * c) - std::pow(0.4 * kPi * t * s, 2));
        }
    EXPECT_NEAR(cert.min_slack, oracle, 1e-2 * std::abs(oracle));
}

TEST(Certificate, RejectsNonUniformTimes) {
    const CircleGrid g(64);
    const std::vector<Potential1D> slices(5, Potential1D(g));
    EXPECT_THROW(check_subgeodesic({0.0, 0.1, 0.3, 0.4, 0.5}, slices), std::invalid_argument);
    EXPECT_THROW(check_subgeodesic({0.0, 0.1, 0.2}, {Potential1D(g), Potential1D(g), Potential1D(g)}), std::invalid_argument);
}

TEST(SubgeodesicDelta, BracketingAndCertificate) {
    const CircleGrid g(1024);
    for (const auto& u : {Potential1D(g), cosine(g, 0.02)}) {
        const double delta = subgeodesic_delta(u, 512);
        EXPECT_GT(delta, 0.0);
        EXPECT_LE(delta, 1.0);
        const auto times = uniform_times(64);
        EXPECT_TRUE(check_subgeodesic(times, bump_family(u, 512, delta)).passes());
        if (delta < 1.0) {
            const auto bigger = bump_family(u, 512, 2.0 * delta);
            const bool kahler = std::all_of(bigger.begin(), bigger.end(), [](const Potential1D& s) { return is_kahler(s); });
            EXPECT_FALSE(kahler && check_subgeodesic(times, bigger).passes());
        }
    }
}

TEST(SubgeodesicDelta, CenterHasZeroSlack) {
    const CircleGrid g(512);
    const auto cert = check_subgeodesic(uniform_times(64), bump_family(Potential1D(g), 100, 0.5));
    for (std::size_t r = 0; r < cert.rows; ++r) EXPECT_NEAR(cert.slack[r * cert.cols + 100], 0.0, 1e-12);
}

TEST(SubgeodesicDelta, RejectsNonKahler) {
    const CircleGrid g(64);
    EXPECT_THROW(subgeodesic_delta(cosine(g, 0.1), 0), std::domain_error);
}

TEST(MaxExtension, ConstantShiftIsUnbounded) {
    const CircleGrid g(256);
    EXPECT_TRUE(std::isinf(max_extension(cosine(g, 0.01), cosine(g, 0.01) + 0.5)));
}

TEST(MaxExtension, ClosedFormOnScaledFamily) {
    const CircleGrid g(1024);
    // v'' has minimum -1, so ε*(s) = (1 - s)/s for u1 = s·v.
    const auto v = Potential1D::sample(g, [](double x) { return std::cos(2.0 * kPi * x) / (4.0 * kPi * kPi); });
    double prev = std::numeric_limits<double>::infinity();
    for (double s : {0.1, 0.3, 0.5, 0.7}) {
        const double eps = max_extension(Potential1D(g), s * v);
        EXPECT_NEAR(eps, (1.0 - s) / s, 1e-3 * (1.0 - s) / s);
        EXPECT_LE(eps, prev);
        prev = eps;
    }
}

TEST(MaxExtension, SteepEndConverges) {
    std::vector<double> err;
    for (std::size_t n : {1024u, 2048u, 4096u}) {
        const CircleGrid g(n);
        const auto v = Potential1D::sample(g, [](double x) { return std::cos(2.0 * kPi * x) / (4.0 * kPi * kPi); });
        err.push_back(std::abs(max_extension(Potential1D(g), 0.95 * v) - 0.05 / 0.95));
    }
    EXPECT_GT(err[0] / err[1], 3.0);
    EXPECT_GT(err[1] / err[2], 3.0);
}

TEST(MaxExtension, ConsistentUnderRestriction) {
    const CircleGrid g(1024);
    Rng rng(15);
    const auto u0 = random_kahler(g, rng, 0.6), u1 = random_kahler(g, rng, 0.6);
    const double eps = max_extension(u0, u1);
    ASSERT_TRUE(std::isfinite(eps));
    const double tau = 1.0 / (1.0 + eps);
    const auto mid = connect(u0, u1, 4).at(tau);
    EXPECT_GE(max_extension(u0, mid), eps * (1.0 - 1e-3));
}

TEST(ExtensionObstruction, Preconditions) {
    const CircleGrid g(64);
    const Potential1D zero(g);
    EXPECT_THROW(verify_extension_obstruction(cosine(g, 0.01), zero - 1.0, zero, 0.5), std::invalid_argument);
    EXPECT_THROW(verify_extension_obstruction(zero, cosine(g, 0.01), zero, 0.5), std::invalid_argument);
    EXPECT_THROW(verify_extension_obstruction(zero, zero - 1.0, zero, 0.0), std::invalid_argument);
}

TEST(ExtensionObstruction, ConstantFamilyIsExactLinearExtension) {
    const CircleGrid g(256);
    const Potential1D zero(g);
    const auto u1 = zero - 0.4;
    const auto cand = extension_slice(zero, u1, 0.75);
    EXPECT_LT(sup_distance(cand, zero + 0.3), 1e-12);
    const auto rep = verify_extension_obstruction(zero, u1, cand, 0.75);
    EXPECT_TRUE(rep.nonnegative);
    EXPECT_NEAR(rep.growth_ratio, 1.0, 1e-10);
}

TEST(ExtensionObstruction, BeyondThresholdBreaksGeodesy) {
    const CircleGrid g(1024);
    const Potential1D zero(g);
    const auto v = Potential1D::sample(g, [](double x) { return (std::cos(2.0 * kPi * x) - 1.0) / (4.0 * kPi * kPi); });
    const auto u1 = 0.8 * v;
    const double eps = max_extension(zero, u1);  // 0.25
    const auto inside = extension_slice(zero, u1, 0.5 * eps);
    EXPECT_TRUE(verify_extension_obstruction(zero, u1, inside, 0.5 * eps).nonnegative);
    EXPECT_LT(extension_defect(zero, u1, inside, 0.5 * eps), 1e-6);
    const auto beyond = extension_slice(zero, u1, 4.0 * eps);
    EXPECT_GT(extension_defect(zero, u1, beyond, 4.0 * eps), 1e-4);
}

TEST(MirrorConcat, RefusesShortExtensions) {
    const CircleGrid g(512);
    const auto v = Potential1D::sample(g, [](double x) { return std::cos(2.0 * kPi * x) / (4.0 * kPi * kPi); });
    EXPECT_THROW(mirror_concat(Potential1D(g), 0.8 * v), ExtensionError);
}

TEST(MirrorConcat, ConstantShiftLine) {
    const CircleGrid g(256);
    const auto u = cosine(g, 0.01);
    const auto path = mirror_concat(u, u + 0.35, 8);
    EXPECT_EQ(path.t_begin(), -1.0);
    EXPECT_LT(sup_distance(path.at(-1.0), u - 0.35), 1e-7);
    EXPECT_LT(sup_distance(path.at(0.0), u), 1e-7);
    EXPECT_EQ(path.slices().size(), 17u);
}

TEST(GeodesicCsv, Layout) {
    const CircleGrid g(16);
    std::ostringstream os;
    write_geodesic_csv(os, connect(Potential1D(g), Potential1D(g, 1.0), 2));
    const auto text = os.str();
    EXPECT_EQ(text.substr(0, 6), "t,x,u\n");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3 * 16);
}

TEST(GeodesicPath, DualRepresentation) {
    const CircleGrid g(256);
    Rng rng(16);
    const auto u0 = random_kahler(g, rng), u1 = random_kahler(g, rng);
    const auto path = connect(u0, u1, 4);
    const auto psi_half = path.dual_at(0.5);
    const auto expected = 0.5 * (periodic_conjugate(u0).dual + periodic_conjugate(u1).dual);
    EXPECT_LT(sup_distance(psi_half, expected), 1e-15);
    EXPECT_LT(sup_abs((path.at(0.5) - path.slices()[2]).values()), 1e-15);
}
