#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "hsgas/geometry.hpp"
#include "hsgas/rng.hpp"

using namespace hsgas;

namespace {

template <std::size_t D>
Vec<D> gauss(Rng& g)
{
    std::normal_distribution<double> n;
    Vec<D> v;
    for (auto& c : v) c = n(g);
    return v;
}

template <std::size_t D>
void scattering_invariants(std::uint64_t seed)
{
    Rng g(seed);
    for (int n = 0; n < 2000; ++n) {
        const Vec<D> v = gauss<D>(g), vs = gauss<D>(g);
        const Vec<D> w = sample_unit_sphere<D>(g);
        auto [a, b] = scattering_map(v, vs, w);
        const double e = norm2(v) + norm2(vs);
        EXPECT_NEAR(norm2(a) + norm2(b), e, 1e-12 * e);
        const Vec<D> p = v + vs, q = a + b;
        for (std::size_t k = 0; k < D; ++k) EXPECT_NEAR(p[k], q[k], 1e-12 * (1 + norm(p)));
        auto [a2, b2] = scattering_map(a, b, w);
        EXPECT_LT(norm(a2 - v) + norm(b2 - vs), 1e-12 * (1 + std::sqrt(e)));
    }
}

// exact a + b - c for c close to a + b
double gap(double a, double b, double c)
{
    const double s = a + b, bb = s - a, e = (a - (s - bb)) + (b - bb);
    return (s - c) + e;
}

// 2r ∫ du / sqrt(r^2 - (u - p)^2) over the slab; endpoint distances come from the complement argument
double arc_by_quadrature(double p, double r, double alpha)
{
    static boost::math::quadrature::tanh_sinh<double> ts;
    // a positive gap means the slab cuts the circle on that side
    const double glo = std::max(0.0, gap(-p, r, alpha)), ghi = std::max(0.0, gap(p, r, alpha));
    const double lo = glo > 0 ? -alpha : p - r, hi = ghi > 0 ? alpha : p + r;
    if (!(hi > lo)) return 0.0;
    return ts.integrate(
        [&](double u, double uc) {
            const double dl = uc < 0 ? glo - uc : r + (u - p);
            const double dh = uc > 0 ? ghi + uc : r - (u - p);
            return 2.0 * r / std::sqrt(dl * dh);
        },
        lo, hi, 1e-14);
}

} // namespace

TEST(Scattering, ConservesAndIsInvolutive2d) { scattering_invariants<2>(1); }
TEST(Scattering, ConservesAndIsInvolutive3d) { scattering_invariants<3>(2); }

TEST(Scattering, JacobianHasUnitModulus)
{
    Rng g(3);
    for (int n = 0; n < 200; ++n) {
        const Vec<3> v = gauss<3>(g), vs = gauss<3>(g), w = sample_unit_sphere<3>(g);
        EXPECT_NEAR(std::abs(scattering_jacobian_det(v, vs, w)), 1.0, 1e-6);
    }
    EXPECT_THROW(scattering_jacobian_det<2>({0, 0}, {1, 0}, {1, 0}, 0.0), std::invalid_argument);
}

TEST(Scattering, HeadOnExchangesNormalComponents)
{
    auto [a, b] = scattering_map<2>({1, 0.5}, {-1, 0.25}, {1, 0});
    EXPECT_DOUBLE_EQ(a[0], -1);
    EXPECT_DOUBLE_EQ(a[1], 0.5);
    EXPECT_DOUBLE_EQ(b[0], 1);
    EXPECT_DOUBLE_EQ(b[1], 0.25);
}

TEST(Scattering, RejectsNonUnitOmega)
{
    EXPECT_THROW(scattering_map<2>({1, 0}, {0, 0}, {2, 0}), std::invalid_argument);
    EXPECT_NO_THROW(scattering_map<2>({1, 0}, {0, 0}, {1 + 1e-11, 0}));
}

TEST(Reflection, SpecularAndShifted)
{
    const Vec<3> v{1, 2, 3};
    EXPECT_EQ(specular_reflect(v), (Vec<3>{-1, 2, 3}));
    EXPECT_EQ(specular_reflect(specular_reflect(v)), v);
    const Vec<2> s = shifted_reflect<2>({0.3, 1.0}, 0.1);
    EXPECT_DOUBLE_EQ(s[0], -0.2);
    EXPECT_DOUBLE_EQ(s[1], 1.0);
    EXPECT_THROW(shifted_reflect<2>({0, 0}, -1), std::invalid_argument);
}

TEST(PhaseSpace, WallAndPairConstraints)
{
    Configuration<2> Z;
    Z.eps = 0.1;
    Z.p = {{{0.05, 0}, {}}, {{0.15, 0}, {}}};
    EXPECT_TRUE(phase_space_contains(Z));
    Z.p[1].x[0] = 0.149;
    EXPECT_FALSE(phase_space_contains(Z));
    Z.p[1].x[0] = 1.0;
    Z.p[0].x[0] = 0.049;
    EXPECT_FALSE(phase_space_contains(Z));
    Z.eps = 0.0;
    Z.p[0].x[0] = 0.0;
    EXPECT_TRUE(phase_space_contains(Z));
    Z.p[0].x[0] = -1e-6;
    EXPECT_FALSE(phase_space_contains(Z));
}

TEST(Cylinder, DistanceMatchesProjection)
{
    Rng g(4);
    for (int n = 0; n < 500; ++n) {
        const Vec<3> a = gauss<3>(g), u = gauss<3>(g), x = gauss<3>(g);
        // dense search along the axis
        double best = 1e300;
        const double t0 = dot(x - a, u) / norm2(u);
        for (int k = -2000; k <= 2000; ++k) best = std::min(best, norm(x - a - (t0 + k * 1e-6) * u));
        EXPECT_NEAR(distance_to_axis(a, u, x), best, 1e-9);
    }
    EXPECT_THROW(distance_to_axis<2>({0, 0}, {0, 0}, {1, 1}), std::invalid_argument);
    EXPECT_TRUE(cylinder_contains<2>({{0, 0}, {1, 0}, 0.5}, {10, 0.4}));
    EXPECT_FALSE(cylinder_contains<2>({{0, 0}, {1, 0}, 0.5}, {10, 0.6}));
}

TEST(SphereSlab, MatchesQuadrature)
{
    for (double r : {0.3, 1.0, 2.5})
        for (double p : {-0.7, 0.0, 0.2, 1.1})
            for (double alpha : {0.05, 0.4, 1.0}) {
                const double ref = arc_by_quadrature(p, r, alpha);
                EXPECT_NEAR(sphere_slab_arc_2d(p, r, alpha), ref, 1e-8) << p << ' ' << r << ' ' << alpha;
            }
    EXPECT_NEAR(sphere_slab_arc_2d(0.0, 1.0, 2.0), 2 * std::numbers::pi, 1e-14);
    EXPECT_THROW(sphere_slab_arc_2d(0, 0, 1), std::invalid_argument);
}

TEST(SphereSlab, MatchesAngularCount)
{
    const double p = 0.3, r = 0.8, alpha = 0.25;
    const int n = 2'000'000;
    int in = 0;
    for (int k = 0; k < n; ++k) {
        const double th = 2 * std::numbers::pi * (k + 0.5) / n;
        in += std::abs(p + r * std::cos(th)) <= alpha;
    }
    EXPECT_NEAR(sphere_slab_arc_2d(p, r, alpha), r * 2 * std::numbers::pi * in / n, 1e-5);
}
