#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include "hsgas/ensemble.hpp"

using namespace hsgas;

namespace {

InitialData<2> data()
{
    InitialData<2> f;
    f.x0 = {1.0, 0.0};
    f.sigma = 0.5;
    return f;
}

// independent sampler: untruncated normal positions, rejected below the wall
Vec<2> position_by_rejection(Rng& g)
{
    std::normal_distribution<double> n;
    for (;;) {
        Vec<2> x{1.0 + 0.5 * n(g), 0.5 * n(g)};
        if (x[0] >= 0.0) return x;
    }
}

} // namespace

TEST(InitialSampling, NoExclusionAcceptsEverything)
{
    Rng g(1);
    const auto s = sample_initial(g, 20, 0.0, data());
    EXPECT_EQ(s.attempts, 1u);
    EXPECT_DOUBLE_EQ(s.acceptance_rate(), 1.0);
}

TEST(InitialSampling, TwoParticleAcceptanceMatchesIndependentEstimate)
{
    const double eps = 0.3;
    Rng g(2);
    const int runs = 40000;
    std::size_t attempts = 0;
    for (int r = 0; r < runs; ++r) {
        const auto s = sample_initial(g, 2, eps, data());
        EXPECT_TRUE(phase_space_contains(s.Z));
        attempts += s.attempts;
    }
    const double p_hat = double(runs) / double(attempts);

    Rng h(3);
    const int n = 1'000'000;
    int ok = 0;
    for (int m = 0; m < n; ++m) {
        const Vec<2> a = position_by_rejection(h), b = position_by_rejection(h);
        ok += a[0] >= eps / 2 && b[0] >= eps / 2 && norm(a - b) >= eps;
    }
    const double p = double(ok) / n;
    // geometric number of attempts: var(1/p_hat) ~ (1 - p) / (p^2 runs)
    const double se = std::sqrt((1 - p) / runs) * p;
    EXPECT_NEAR(p_hat, p, 4 * se + 4 * std::sqrt(p * (1 - p) / n));
    EXPECT_LT(p, 0.95);
}

TEST(InitialSampling, GivesUpWithDiagnostics)
{
    Rng g(4);
    EXPECT_THROW(sample_initial(g, 30, 1.0, data(), 50), std::runtime_error);
}

TEST(Ensemble, DeterministicAcrossThreads)
{
    auto run = [](unsigned threads) {
        std::vector<double> x(40);
        const auto st = run_ensemble<2>(8, 0.05, data(), 0.5, 40, 7, 4, threads,
                                        [&](std::size_t, std::size_t r, const Configuration<2>& Z) {
                                            x[r] = Z.p[0].x[0] + Z.p[3].v[1];
                                        });
        return std::make_pair(st.pair_collisions, x);
    };
    EXPECT_EQ(run(1), run(3));
}

TEST(Ensemble, ConservesEnergy)
{
    EnsembleStats st;
    const auto Zs = collect_ensemble<2>(10, 0.05, data(), 1.0, 30, 5, &st);
    EXPECT_EQ(st.replicas, 30u);
    EXPECT_NEAR(st.energy_final, st.energy_initial, 1e-12 * st.energy_initial);
    for (const auto& Z : Zs) EXPECT_TRUE(phase_space_contains(Z));
}

TEST(Marginal, InitialFirstMarginalMatchesData)
{
    MarginalHistogram shape;
    shape.s = 1;
    shape.axes = {HistAxis{0, false, 0, 0.0, 2.0, 4}};
    MarginalAccumulator a(shape, 4), b(shape, 4), all(shape, 4);
    std::size_t k = 0;
    run_ensemble<2>(4, 1e-5, data(), 0.0, 20000, 3, 1, 1, [&](std::size_t, std::size_t, const Configuration<2>& Z) {
        (k++ % 2 ? a : b).add(Z);
        all.add(Z);
    });
    a.merge(b);
    const auto h = all.result(), m = a.result();
    const boost::math::normal nd(1.0, 0.5);
    const double z = 1.0 - boost::math::cdf(nd, 0.0);
    for (std::size_t c = 0; c < h.cells(); ++c) {
        const double lo = 0.5 * c, hi = lo + 0.5;
        const double ref = (boost::math::cdf(nd, hi) - boost::math::cdf(nd, lo)) / z;
        EXPECT_NEAR(h.mass[c], ref, 4 * h.mass_se[c]) << c;
        EXPECT_NEAR(m.mass[c], h.mass[c], 1e-12);
    }
    EXPECT_EQ(h.replicas, 20000u);
    EXPECT_EQ(h.subsets_per_replica, 4u);
}

TEST(Marginal, RejectsBadAxis)
{
    MarginalHistogram shape;
    shape.s = 1;
    shape.axes = {HistAxis{1, false, 0, 0.0, 2.0, 4}};
    EXPECT_THROW(MarginalAccumulator(shape, 4), std::invalid_argument);
}

TEST(Admissible, NoExclusionGivesUnitRatio)
{
    const std::vector<std::vector<Vec<2>>> pts{{{1.0, 0.0}}, {{0.5, 0.5}}};
    const auto r = admissible_deviation(data(), 6, 0.0, pts, 2000, 1);
    EXPECT_DOUBLE_EQ(r.partition, 1.0);
    for (double x : r.ratio) EXPECT_DOUBLE_EQ(x, 1.0);
    EXPECT_DOUBLE_EQ(r.sup_dev, 0.0);
}

TEST(Admissible, CrowdedPointIsSuppressed)
{
    // a point at the density peak is excluded more often than the average draw
    const std::vector<std::vector<Vec<2>>> pts{{{1.0, 0.0}}, {{2.2, 1.2}}};
    const auto r = admissible_deviation(data(), 20, 0.1, pts, 40000, 2);
    EXPECT_LT(r.ratio[0], r.ratio[1]);
    EXPECT_LT(r.ratio[0], 1.0 - 4 * r.ratio_se[0]);
    EXPECT_THROW(admissible_deviation(data(), 2, 0.1, std::vector<std::vector<Vec<2>>>{}, 10, 1),
                 std::invalid_argument);
}
