#include <gtest/gtest.h>

#include <cmath>

#include "mabuchi/metric.hpp"
#include "mabuchi/random.hpp"
#include "oracles.hpp"

using namespace mabuchi;

namespace {

Potential1D cosine(const CircleGrid& g, double a) {
    return Potential1D::sample(g, [=](double x) { return a * std::cos(2.0 * kPi * x); });
}

}  // namespace

TEST(Dp, ConstantShiftAndSelf) {
    const CircleGrid g(512);
    const auto u = cosine(g, 0.015);
    for (double p : kExponentSweep) {
        EXPECT_NEAR(d_p(u, u + 0.4, p).value, 0.4, 1e-12);
        EXPECT_NEAR(d_p(u, u - 0.4, p).value, 0.4, 1e-12);
        EXPECT_EQ(d_p(u, u, p).value, 0.0);
    }
    EXPECT_NEAR(d_infinity(u, u + 0.4), 0.4, 1e-12);
}

TEST(Dp, RejectsSmallExponent) {
    const CircleGrid g(64);
    EXPECT_THROW(d_p(Potential1D(g), Potential1D(g), 0.5), std::invalid_argument);
}

TEST(Dp, MatchesFlatDualOracle) {
    const CircleGrid g(1024);
    const oracle::Fn f0 = [](double x) { return 0.004 * std::sin(4.0 * kPi * x); };
    const oracle::Fn f1 = [](double x) { return 0.02 * std::cos(2.0 * kPi * x) - 0.01; };
    const oracle::AnalyticGeodesic ref(f0, f1);
    const auto u0 = Potential1D::sample(g, f0), u1 = Potential1D::sample(g, f1);
    for (double p : {1.0, 2.0, 4.0}) EXPECT_NEAR(d_p(u0, u1, p).value, ref.distance(p), 1e-5 * ref.distance(p));
    EXPECT_NEAR(d_infinity(u0, u1), ref.sup_distance(), 1e-6);
}

TEST(Dp, SymmetricUpToDiscretization) {
    const CircleGrid g(1024);
    Rng rng(41);
    for (int k = 0; k < 10; ++k) {
        const auto u0 = random_kahler(g, rng), u1 = random_kahler(g, rng);
        EXPECT_NEAR(d2(u0, u1), d2(u1, u0), g.spacing());
    }
}

TEST(Dp, MonotoneInExponent) {
    const CircleGrid g(512);
    Rng rng(42);
    for (int k = 0; k < 50; ++k) {
        const auto u0 = random_kahler(g, rng), u1 = random_kahler(g, rng);
        double prev = 0.0;
        for (double p : {1.0, 1.5, 2.0, 4.0, 8.0}) {
            const double d = d_p(u0, u1, p).value;
            EXPECT_GE(d - prev, -1e-10);
            prev = d;
        }
    }
}

TEST(Dinf, LimitOfDp) {
    const CircleGrid g(1024);
    Rng rng(43);
    const auto u0 = random_kahler(g, rng), u1 = random_kahler(g, rng);
    const double dinf = d_infinity(u0, u1);
    double prev = 0.0;
    for (double p : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
        const double d = d_p(u0, u1, p).value;
        EXPECT_GE(d, prev - 1e-10);
        EXPECT_LE(d, dinf + 1e-12);
        prev = d;
    }
    EXPECT_LE(std::abs(prev - dinf), 0.05 * dinf);
}

TEST(Dinf, OrderedPairIsSupOfDifference) {
    const CircleGrid g(1024);
    Rng rng(44);
    const auto u0 = random_kahler(g, rng);
    auto u1 = random_kahler(g, rng);
    u1 += -(u1 - u0).max() - 0.05;  // u1 <= u0
    EXPECT_NEAR(d_infinity(u0, u1), (u0 - u1).max(), 5.0 * g.spacing());
}

TEST(SegmentSpeed, ConstantAlongGeodesic) {
    const CircleGrid g(1024);
    Rng rng(45);
    const auto u0 = random_kahler(g, rng), u1 = random_kahler(g, rng);
    const auto path = connect(u0, u1, 64);
    const double whole = d2(u0, u1);
    EXPECT_NEAR(segment_speed(path, 0.0, 1.0), whole, 1e-3 * whole);
    for (auto [a, b] : {std::pair{0.0, 0.5}, {0.5, 1.0}, {0.2, 0.3}, {0.1, 0.9}})
        EXPECT_NEAR(segment_speed(path, a, b), whole, 1e-3 * whole);
    const auto mid = path.at(0.37);
    EXPECT_NEAR(d2(u0, mid) + d2(mid, u1), whole, 1e-3 * whole);
}

TEST(SegmentSpeed, RejectsBadIntervals) {
    const CircleGrid g(64);
    const auto path = connect(Potential1D(g), Potential1D(g, 1.0), 4);
    EXPECT_THROW(segment_speed(path, 0.5, 0.5), std::invalid_argument);
    EXPECT_THROW(segment_speed(path, -0.5, 0.5), std::invalid_argument);
}

TEST(Cat0, FlatLineHasZeroSlack) {
    const CircleGrid g(256);
    const auto u = cosine(g, 0.01);
    const auto r = cat0_check(u - 0.3, u + 0.3, u);
    EXPECT_NEAR(r.slack, 0.0, 1e-10);
    EXPECT_TRUE(r.passes);
    const auto s = cat0_check(Potential1D(g), Potential1D(g, 0.5), cosine(g, 0.02));
    EXPECT_NEAR(s.slack, 0.0, 1e-6);
}

TEST(Cat0, RandomTriples) {
    const CircleGrid g(512);
    Rng rng(46);
    for (int k = 0; k < 20; ++k) {
        const auto u = random_kahler(g, rng), v = random_kahler(g, rng), w = random_kahler(g, rng);
        const auto r = cat0_check(u, v, w);
        EXPECT_TRUE(r.passes) << r.slack;
        EXPECT_LE(d2(u, w), d2(u, v) + d2(v, w) + 1e-6);
    }
}
