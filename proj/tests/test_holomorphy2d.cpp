#include <gtest/gtest.h>

#include <cmath>

#include "mabuchi/holomorphy2d.hpp"

using namespace mabuchi;

namespace {

double laplacian_error(std::size_t m) {
    const auto u = Potential2D::sample(m, [](double x, double y) { return std::cos(2.0 * kPi * x) * std::cos(4.0 * kPi * y); });
    const auto d = ddbar(u);
    double worst = 0.0;
    const double h = u.spacing();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            const double x = a * h, y = b * h;
            const double exact = -0.5 * 20.0 * kPi * kPi * std::cos(2.0 * kPi * x) * std::cos(4.0 * kPi * y);
            worst = std::max(worst, std::abs(d.half_laplacian(a, b) - exact));
        }
    return worst;
}

}  // namespace

TEST(Ddbar, ConstantVanishes) {
    const auto d = ddbar(Potential2D(16, 3.0));
    for (double v : d.half_laplacian.values()) EXPECT_EQ(v, 0.0);
    for (double v : d.uzz_re.values()) EXPECT_EQ(v, 0.0);
    for (double v : d.uzz_im.values()) EXPECT_EQ(v, 0.0);
}

TEST(Ddbar, SecondOrderConvergence) {
    const double e1 = laplacian_error(32), e2 = laplacian_error(64);
    EXPECT_GT(e1 / e2, 3.8);
    EXPECT_LT(e2, 1e-2 * 10.0 * kPi * kPi);
}

TEST(Ddbar, HolomorphicPartOfQuadraticForm) {
    // u = xy-type harmonic: sin 2πx sin 2πy has Δ ≠ 0; cos 2π(x+y) - cos 2π(x-y) has u_xx = u_yy.
    const std::size_t m = 64;
    const auto u = Potential2D::sample(m, [](double x, double y) { return std::cos(2.0 * kPi * (x + y)) - std::cos(2.0 * kPi * (x - y)); });
    const auto d = ddbar(u);
    for (double v : d.uzz_re.values()) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(TorusMap2D, DeterminantValidation) {
    EXPECT_THROW(TorusMap2D({2, 0, 0, 1}, {0.0, 0.0}, "scale"), std::invalid_argument);
    EXPECT_THROW(TorusMap2D({0, 0, 0, 0}, {0.0, 0.0}, "zero"), std::invalid_argument);
    EXPECT_NO_THROW(TorusMap2D({2, 1, 1, 1}, {0.0, 0.0}, "cat"));
}

TEST(TorusMap2D, Parse) {
    EXPECT_EQ(TorusMap2D::parse("conjugation").det(), -1);
    const auto t = TorusMap2D::parse("translation:0.5,0.25");
    EXPECT_EQ(t.t[0], 0.5);
    EXPECT_EQ(t.t[1], 0.25);
    for (const char* bad : {"translation:0.5", "translationx", "translation:a,b", "scale"})
        EXPECT_THROW(TorusMap2D::parse(bad), std::invalid_argument) << bad;
}

TEST(TorusMap2D, ComposeIsMatrixProduct) {
    const auto q = TorusMap2D::quarter_turn();
    const auto qq = compose(q, q);
    EXPECT_EQ(qq.A, TorusMap2D::rotation().A);
    const auto c = compose(TorusMap2D::translation(0.1, 0.2), TorusMap2D::conjugation());
    const auto p = c(0.3, 0.4);
    EXPECT_NEAR(p[0], 0.4, 1e-15);
    EXPECT_NEAR(p[1], -0.2, 1e-15);
}

TEST(Holomorphy, KnownSigns) {
    const std::pair<TorusMap2D, HolomorphySign> cases[] = {
        {TorusMap2D::translation(0.3, 0.1), HolomorphySign::holomorphic},
        {TorusMap2D::rotation(), HolomorphySign::holomorphic},
        {TorusMap2D::quarter_turn(), HolomorphySign::holomorphic},
        {TorusMap2D::conjugation(), HolomorphySign::antiholomorphic},
        {TorusMap2D::shear(), HolomorphySign::none},
    };
    for (const auto& [g, sign] : cases) {
        const auto r = holomorphy_check(g, 64);
        EXPECT_EQ(r.sign, sign) << g.name << " r+=" << r.r_plus << " r-=" << r.r_minus;
    }
}

TEST(Holomorphy, ShearFailsBothWaysClearly) {
    const auto r = holomorphy_check(TorusMap2D::shear(), 64);
    EXPECT_GT(r.r_plus, 0.5);
    EXPECT_GT(r.r_minus, 0.5);
    EXPECT_EQ(r.probes.size(), 48u);
}

TEST(Holomorphy, ContinuumReferenceConverges) {
    const auto g = TorusMap2D::translation(0.3, 0.1);
    const double e1 = holomorphy_check(g, 32, 1.0, LaplacianReference::continuum).r_plus;
    const double e2 = holomorphy_check(g, 64, 1.0, LaplacianReference::continuum).r_plus;
    EXPECT_GT(e1 / e2, 3.5);
    EXPECT_LT(holomorphy_check(g, 64).r_plus, 1e-9);
}

TEST(Holomorphy, CompositionCoherence) {
    const TorusMap2D family[] = {TorusMap2D::translation(0.3, 0.1), TorusMap2D::rotation(), TorusMap2D::conjugation(),
                                 TorusMap2D::quarter_turn()};
    for (const auto& a : family)
        for (const auto& b : family) {
            const auto sa = holomorphy_check(a, 32).sign, sb = holomorphy_check(b, 32).sign;
            EXPECT_EQ(holomorphy_check(compose(a, b), 32).sign, sa * sb) << a.name << " o " << b.name;
        }
    EXPECT_EQ(HolomorphySign::antiholomorphic * HolomorphySign::antiholomorphic, HolomorphySign::holomorphic);
    EXPECT_EQ(HolomorphySign::none * HolomorphySign::holomorphic, HolomorphySign::none);
    EXPECT_STREQ(to_string(HolomorphySign::none), "none");
}
