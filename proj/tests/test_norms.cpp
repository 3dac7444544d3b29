#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "hsgas/norms.hpp"

using namespace hsgas;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

double gk(const std::function<double(double)>& f, double a, double b)
{
    return GK::integrate(f, a, b, 15, 1e-13);
}

} // namespace

TEST(Norms, WeightedSupAndSequence)
{
    EXPECT_DOUBLE_EQ(weighted_sup_norm({1.0, -2.0}, {0.0, 2.0}, 1.0), 2.0 * std::exp(1.0));
    EXPECT_THROW(weighted_sup_norm({1.0}, {}, 1.0), std::invalid_argument);
    EXPECT_DOUBLE_EQ(sequence_norm({1.0, 1.0}, 0.5), std::exp(1.0));
    EXPECT_DOUBLE_EQ(sequence_norm({1.0, 1.0}, -0.5), std::exp(-0.5));
}

TEST(Norms, GridGrowthFlagsUnweightedInput)
{
    const auto bad = grid_norm_growth([](double) { return 1.0; }, 1.0, {2, 4, 6, 8});
    EXPECT_TRUE(bad.diverges);
    const auto ok = grid_norm_growth([](double v2) { return std::exp(-v2); }, 1.0, {2, 4, 6, 8});
    EXPECT_FALSE(ok.diverges);
}

TEST(Norms, GaussianFirstMomentMatchesRadialQuadrature)
{
    for (double beta : {0.5, 1.0, 3.0})
        for (int d : {2, 3}) {
            const double area = d == 2 ? 2 * M_PI : 4 * M_PI;
            const double ref =
                area * gk([&](double r) { return std::pow(r, d) * std::exp(-0.5 * beta * r * r); }, 0.0, 40.0 / std::sqrt(beta));
            EXPECT_NEAR(gaussian_first_moment(beta, d), ref, 1e-10 * ref);
        }
    EXPECT_THROW(gaussian_first_moment(0.0, 2), std::invalid_argument);
}

TEST(Norms, CollisionVelocityIntegralMatchesCartesianQuadrature)
{
    const double beta = 0.8;
    const std::vector<Vec<2>> V{{0.3, -0.4}, {1.0, 0.5}};
    const double e = norm2(V[0]) + norm2(V[1]);
    const double L = 14.0 / std::sqrt(beta);
    // quadrant symmetry of |w| exp(-beta |w|^2 / 2)
    auto inner = [&](double y) {
        return gk([&](double x) { return (norm(V[1]) + std::hypot(x, y)) * std::exp(-0.5 * beta * (x * x + y * y)); }, 0.0, L);
    };
    const double ref = 4.0 * std::exp(-0.5 * beta * e) * gk(inner, 0.0, L);
    EXPECT_NEAR(collision_velocity_integral(V, 1, beta), ref, 1e-8 * ref);
    EXPECT_THROW(collision_velocity_integral(V, 2, beta), std::invalid_argument);
}

TEST(Norms, RelativeSpeedMomentMatchesQuadrature)
{
    const RelativeSpeedMoment<2> G(200000, 3);
    for (double beta : {0.5, 1.0})
        for (double r : {0.0, 0.7, 3.0}) {
            // G = ∫ |v - r e1| exp(-beta |v|^2 / 2) dv over R^2
            const double L = 12.0 / std::sqrt(beta);
            auto inner = [&](double y) {
                return gk([&](double x) { return std::hypot(x - r, y) * std::exp(-0.5 * beta * (x * x + y * y)); }, -L, L);
            };
            const double ref = 2.0 * gk(inner, 0.0, L);
            auto [g, se] = G(beta, r);
            EXPECT_NEAR(g, ref, 5 * se + 1e-3 * ref) << beta << ' ' << r;
        }
    EXPECT_THROW(G(1.0, 1000.0), std::invalid_argument);
}

TEST(Norms, WeightValidation)
{
    NormWeights w;
    w.beta0 = 1.0;
    w.lambda = 100.0;
    w.T = 0.0025;
    EXPECT_NO_THROW(w.validate());
    w.T = 0.02;
    EXPECT_THROW(w.validate(), std::invalid_argument);
    w.T = 0.0025;
    w.lambda = 0.0;
    EXPECT_THROW(w.validate(), std::invalid_argument);
}

TEST(Norms, ContractionAtShippedWeights)
{
    NormWeights w;
    w.beta0 = 1.0;
    w.mu0 = 0.0;
    w.lambda = 100.0;
    w.T = 0.0025;
    ContractionGrid grid;
    grid.u_points = 100;
    grid.t_points = 4;
    const auto r = contraction_check<2>(w, grid, 20000, 1);
    EXPECT_TRUE(r.contracting);
    EXPECT_FALSE(r.divergent);
    w.T = 0.00125;
    const auto shorter = contraction_check<2>(w, grid, 20000, 1);
    EXPECT_LT(shorter.factor, r.factor);
}

TEST(Norms, ContinuityModulusVanishesAtZeroWidth)
{
    NormWeights w;
    w.lambda = 100.0;
    w.T = 0.0025;
    const RelativeSpeedMoment<2> G(5000, 1);
    ContractionGrid grid;
    grid.u_points = 50;
    EXPECT_EQ(continuity_modulus<2>(w, G, w.T, w.T, 4, grid), 0.0);
    const double a = continuity_modulus<2>(w, G, w.T, w.T - 1e-4, 4, grid);
    const double b = continuity_modulus<2>(w, G, w.T, w.T - 4e-4, 4, grid);
    EXPECT_GT(b, a);
    EXPECT_GT(a, 0.0);
}
