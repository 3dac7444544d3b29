#include <cmath>

#include <gtest/gtest.h>

#include "hsgas/free_flow.hpp"
#include "hsgas/rng.hpp"

using namespace hsgas;

namespace {

// dense-time oracle for min_future_pair_distance
template <std::size_t D>
double scan_min(const ParticleState<D>& a, const ParticleState<D>& b, double H, int steps)
{
    double m = 1e300;
    for (int k = 1; k <= steps; ++k) {
        const double tau = H * k / steps;
        m = std::min(m, norm(free_transport(a, -tau).x - free_transport(b, -tau).x));
    }
    return m;
}

} // namespace

TEST(FreeTransport, ReflectsAtTheWall)
{
    const ParticleState<2> p{{1.0, 0.0}, {-1.0, 0.5}};
    const auto q = free_transport(p, 3.0);
    EXPECT_DOUBLE_EQ(q.x[0], 2.0);
    EXPECT_DOUBLE_EQ(q.x[1], 1.5);
    EXPECT_DOUBLE_EQ(q.v[0], 1.0);
    EXPECT_DOUBLE_EQ(norm(q.v), norm(p.v));
}

TEST(FreeTransport, BackwardUndoesForward)
{
    Rng g(1);
    for (int n = 0; n < 1000; ++n) {
        ParticleState<3> p;
        p.x = {uniform01(g), uniform01(g), uniform01(g)};
        p.v = sample_ball<3>(g, 2.0);
        const double t = 3 * uniform01(g);
        const auto q = free_transport(free_transport(p, t), -t);
        EXPECT_LT(norm(q.x - p.x), 1e-12);
        EXPECT_LT(norm(q.v - p.v), 1e-12);
    }
}

TEST(FreeTransport, BounceTime)
{
    EXPECT_FALSE(backward_bounce_time<2>({{1, 0}, {-1, 0}}));
    EXPECT_DOUBLE_EQ(*backward_bounce_time<2>({{1, 0}, {2, 0}}), 0.5);
}

TEST(FreeTransport, PairMinimumMatchesScan)
{
    Rng g(2);
    for (int n = 0; n < 300; ++n) {
        ParticleState<2> a, b;
        a.x = {0.1 + uniform01(g), uniform01(g)};
        b.x = {0.1 + uniform01(g), uniform01(g)};
        a.v = sample_ball<2>(g, 1.5);
        b.v = sample_ball<2>(g, 1.5);
        const double H = 4.0;
        const double exact = min_future_pair_distance(a, b, H);
        const double scan = scan_min(a, b, H, 40000);
        EXPECT_LE(exact, scan + 1e-12);
        // scan resolution: relative speed <= 3, step 1e-4
        EXPECT_GE(exact, scan - 3e-4);
    }
}

TEST(FreeTransport, GoodConfiguration)
{
    Configuration<2> Z;
    Z.p = {{{1, 0}, {0, 1}}, {{1, 1}, {0, -1}}}; // backward: moving apart
    EXPECT_TRUE(good_config_free(Z, 0.5));
    Z.p[1].v = {0, 1.0};
    Z.p[0].v = {0, -1.0}; // backward: they approach and cross
    EXPECT_FALSE(good_config_free(Z, 0.5));
}
