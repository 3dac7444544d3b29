#include <cmath>

#include <gtest/gtest.h>

#include "hsgas/hard_sphere.hpp"

using namespace hsgas;

namespace {

template <std::size_t D>
double energy(const Configuration<D>& Z)
{
    double e = 0;
    for (const auto& q : Z.p) e += norm2(q.v);
    return e;
}

} // namespace

TEST(HardSphere, PairContactTime)
{
    const ParticleState<2> a{{1, 0}, {1, 0}}, b{{2, 0}, {-1, 0}};
    EXPECT_NEAR(*pair_collision_time(a, b, 0.1), 0.45, 1e-15);
    EXPECT_NEAR(*pair_collision_time(b, a, 0.1), 0.45, 1e-15);
    const ParticleState<2> c{{2, 0}, {1, 0}};
    EXPECT_FALSE(pair_collision_time(a, c, 0.1)); // same velocity
    const ParticleState<2> d{{2, 0.2}, {-1, 0}};
    EXPECT_FALSE(pair_collision_time(a, d, 0.1)); // misses
    EXPECT_THROW(pair_collision_time(a, ParticleState<2>{{1.05, 0}, {}}, 0.1), std::invalid_argument);
}

TEST(HardSphere, WallTime)
{
    EXPECT_DOUBLE_EQ(*wall_bounce_time<2>({{1.05, 0}, {-2, 0}}, 0.1), 0.5);
    EXPECT_FALSE(wall_bounce_time<2>({{1, 0}, {0, 1}}, 0.1));
}

TEST(HardSphere, HeadOnCollisionSwapsVelocities)
{
    Configuration<2> Z;
    Z.eps = 0.1;
    Z.p = {{{1, 5}, {1, 0}}, {{2, 5}, {-1, 0}}};
    const auto r = advance(Z, 1.0);
    ASSERT_EQ(r.events.size(), 1u);
    EXPECT_EQ(r.events[0].kind, EventKind::pair);
    EXPECT_NEAR(r.events[0].time, 0.45, 1e-14);
    EXPECT_NEAR(r.final.p[0].v[0], -1, 1e-14);
    EXPECT_NEAR(r.final.p[1].v[0], 1, 1e-14);
    // contact at 1.45 and 1.55, then 0.55 of travel apart
    EXPECT_NEAR(r.final.p[0].x[0], 0.9, 1e-13);
    EXPECT_NEAR(r.final.p[1].x[0], 2.1, 1e-13);
}

TEST(HardSphere, WallBounceAtHalfDiameter)
{
    Configuration<2> Z;
    Z.eps = 0.2;
    Z.p = {{{1.1, 0}, {-1, 0}}};
    const auto r = advance(Z, 2.0);
    ASSERT_EQ(r.events.size(), 1u);
    EXPECT_NEAR(r.events[0].time, 1.0, 1e-14);
    EXPECT_NEAR(r.final.p[0].x[0], 1.1, 1e-14);
}

TEST(HardSphere, ConservesEnergyAndReverses)
{
    Rng g(5);
    std::size_t rej = 0;
    for (int n = 0; n < 20; ++n) {
        const auto Z = sample_box_configuration<2>(g, 12, 0.1, 1.0, rej);
        const auto f = advance(Z, 3.0);
        ASSERT_FALSE(f.pathological);
        EXPECT_NEAR(energy(f.final), energy(Z), 1e-12 * energy(Z));
        EXPECT_TRUE(phase_space_contains(f.final));
        const auto b = advance(negate_velocities(f.final), 3.0);
        const auto back = negate_velocities(b.final);
        for (std::size_t i = 0; i < Z.size(); ++i) {
            EXPECT_LT(norm(back.p[i].x - Z.p[i].x), 1e-8);
            EXPECT_LT(norm(back.p[i].v - Z.p[i].v), 1e-8);
        }
    }
}

TEST(HardSphere, NegativeTimeRunsBackward)
{
    Configuration<2> Z;
    Z.eps = 0.1;
    Z.p = {{{1, 0}, {1, 0}}, {{3, 0}, {0, 0}}};
    const auto r = advance(Z, -0.5);
    EXPECT_NEAR(r.final.p[0].x[0], 0.5, 1e-15);
    EXPECT_DOUBLE_EQ(r.final.p[0].v[0], 1.0);
}

TEST(HardSphere, RejectsInvalidStart)
{
    Configuration<2> Z;
    Z.eps = 0.1;
    Z.p = {{{1, 0}, {}}, {{1.01, 0}, {}}};
    EXPECT_THROW(advance(Z, 1.0), std::invalid_argument);
}

TEST(HardSphere, GoodConfigurationVerdicts)
{
    Configuration<2> Z;
    Z.eps = 0.01;
    // the verdict concerns the backward flow, whose velocities are -v
    Z.p = {{{1, 0}, {-1, 0}}, {{2, 0}, {1, 0}}};
    EXPECT_EQ(good_config_hard(Z, 0.05), Verdict::no);
    Z.p = {{{1, 0}, {-1, 1}}, {{1, 1}, {-1, -1}}};
    EXPECT_EQ(good_config_hard(Z, 0.05), Verdict::yes);
    Z.p = {{{1, 0}, {-1, 1}}, {{1, 1}, {-1, 2}}};
    EXPECT_EQ(good_config_hard(Z, 0.05), Verdict::no);
    // mirror pair: both reach the wall at the same point
    Z.p = {{{1, -1}, {1, -1}}, {{1, 1}, {1, 1}}};
    EXPECT_EQ(good_config_hard(Z, 0.05), Verdict::no);
    EXPECT_THROW(good_config_hard(Z, 0.005), std::invalid_argument);
}

TEST(Pathology, ZeroToleranceFlagsNothing)
{
    const auto r = pathology_probe<2>(8, 0.05, 1.0, 1.0, 50, 0.0, 7);
    EXPECT_EQ(r.flagged, 0u);
    EXPECT_EQ(r.samples, 50u);
    const auto big = pathology_probe<2>(8, 0.05, 1.0, 1.0, 50, 10.0, 7);
    EXPECT_GT(big.flagged, 0u);
}

TEST(Pathology, WilsonInterval)
{
    auto [lo, hi] = wilson_interval(0, 100);
    EXPECT_NEAR(lo, 0.0, 1e-15);
    EXPECT_NEAR(hi, 0.037, 1e-3);
    auto [l2, h2] = wilson_interval(50, 100);
    EXPECT_LT(l2, 0.5);
    EXPECT_GT(h2, 0.5);
    EXPECT_NEAR(0.5 - l2, h2 - 0.5, 1e-12);
}

TEST(Sampling, BoxConfigurationIsAdmissible)
{
    Rng g(9);
    std::size_t rej = 0;
    for (int n = 0; n < 50; ++n) {
        const auto Z = sample_box_configuration<3>(g, 10, 0.2, 1.0, rej);
        EXPECT_TRUE(phase_space_contains(Z));
        for (const auto& q : Z.p) EXPECT_LE(norm(q.v), 1.0);
    }
}
