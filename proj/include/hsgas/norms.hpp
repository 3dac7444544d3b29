#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hsgas/rng.hpp"
#include "hsgas/stats.hpp"
#include "hsgas/vec.hpp"

namespace hsgas {

/// max over samples of |h| exp(beta |V|^2 / 2); v2[i] is |V|^2 of sample i.
inline double weighted_sup_norm(const std::vector<double>& h, const std::vector<double>& v2, double beta)
{
    if (h.size() != v2.size()) throw std::invalid_argument("weighted_sup_norm: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) m = std::max(m, std::abs(h[i]) * std::exp(0.5 * beta * v2[i]));
    return m;
}

/// sup over s of exp(s mu) |h_s|; norms[s-1] holds the s-particle norm.
inline double sequence_norm(const std::vector<double>& norms, double mu)
{
    double m = 0.0;
    for (std::size_t s = 1; s <= norms.size(); ++s) m = std::max(m, std::exp(double(s) * mu) * norms[s - 1]);
    return m;
}

struct GridGrowth {
    std::vector<double> norms; ///< one per extent
    bool diverges = false;
};

/// Weighted norm of a radial function on velocity grids of growing extent; flags unbounded growth.
inline GridGrowth grid_norm_growth(const std::function<double(double)>& h_of_v2, double beta,
                                   const std::vector<double>& extents, std::size_t points = 2000,
                                   double growth_factor = 1e3)
{
    GridGrowth g;
    for (double L : extents) {
        std::vector<double> h, v2;
        for (std::size_t k = 0; k <= points; ++k) {
            const double r = L * double(k) / double(points);
            v2.push_back(r * r);
            h.push_back(h_of_v2(r * r));
        }
        g.norms.push_back(weighted_sup_norm(h, v2, beta));
    }
    bool increasing = true;
    for (std::size_t k = 1; k < g.norms.size(); ++k) increasing &= g.norms[k] > g.norms[k - 1];
    g.diverges = g.norms.size() > 1 && increasing && g.norms.back() > growth_factor * g.norms.front();
    return g;
}

/// First absolute moment of exp(-beta |v|^2 / 2) over R^d.
inline double gaussian_first_moment(double beta, int d)
{
    if (!(beta > 0.0)) throw std::invalid_argument("gaussian_first_moment: beta <= 0");
    const double area = d == 2 ? 2.0 * M_PI : 4.0 * M_PI;
    return area * 0.5 * std::pow(2.0 / beta, 0.5 * (d + 1)) * std::tgamma(0.5 * (d + 1));
}

/// Closed form of the integral of (|v_i| + |v_{s+1}|) exp(-beta |V_{s+1}|^2 / 2) over v_{s+1}.
template <std::size_t D>
inline double collision_velocity_integral(const std::vector<Vec<D>>& V, std::size_t i, double beta)
{
    if (!(beta > 0.0)) throw std::invalid_argument("collision_velocity_integral: beta <= 0");
    if (i >= V.size()) throw std::invalid_argument("collision_velocity_integral: index out of range");
    double e = 0.0;
    for (const auto& v : V) e += norm2(v);
    const int d = static_cast<int>(D);
    return std::exp(-0.5 * beta * e) *
           (norm(V[i]) * std::pow(2.0 * M_PI / beta, 0.5 * d) + gaussian_first_moment(beta, d));
}

/// Weights beta(t) = beta0 - lambda t, mu(t) = mu0 - lambda t on [0, T].
struct NormWeights {
    double beta0 = 1.0;
    double mu0 = 0.0;
    double lambda = 1.0;
    double T = 0.1;

    double beta(double t) const { return beta0 - lambda * t; }
    double mu(double t) const { return mu0 - lambda * t; }
    void validate() const
    {
        if (!(lambda > 0.0) || !(T > 0.0)) throw std::invalid_argument("norm weights: lambda, T must be > 0");
        if (!(beta(T) > 0.0)) throw std::invalid_argument("norm weights: beta(T) <= 0");
    }
};

/// Monte Carlo table of G(beta, r) = integral of |v - r e1| exp(-beta |v|^2 / 2) dv.
/// G(beta, r) = (2 pi / beta)^{d/2} beta^{-1/2} H(r sqrt(beta)) with H(p) = E|Y - p e1|, Y standard normal;
/// H is tabulated from one fixed set of draws and interpolated linearly.
template <std::size_t D>
class RelativeSpeedMoment {
public:
    RelativeSpeedMoment(std::size_t samples, std::uint64_t seed, double p_max = 200.0, std::size_t nodes = 4001)
        : p_max_(p_max), h_(nodes), se_(nodes)
    {
        Rng g = make_rng(seed, {0xc0de71ULL});
        std::normal_distribution<double> n01;
        std::vector<Vec<D>> y(samples);
        for (auto& v : y)
            for (auto& c : v) c = n01(g);
        std::vector<double> blocks(32);
        for (std::size_t k = 0; k < nodes; ++k) {
            const double p = p_max * double(k) / double(nodes - 1);
            std::fill(blocks.begin(), blocks.end(), 0.0);
            for (std::size_t m = 0; m < samples; ++m) {
                Vec<D> u = y[m];
                u[0] -= p;
                blocks[m % blocks.size()] += norm(u);
            }
            const double per = double(samples) / double(blocks.size());
            for (auto& b : blocks) b /= per;
            std::tie(h_[k], se_[k]) = mean_and_se(blocks);
        }
    }

    /// Estimate and standard error.
    std::pair<double, double> operator()(double beta, double r) const
    {
        const double p = r * std::sqrt(beta);
        if (p > p_max_) throw std::invalid_argument("RelativeSpeedMoment: argument beyond table");
        const double x = p / p_max_ * double(h_.size() - 1);
        const std::size_t k = std::min(static_cast<std::size_t>(x), h_.size() - 2);
        const double f = x - double(k);
        const double h = (1 - f) * h_[k] + f * h_[k + 1];
        const double se = std::max(se_[k], se_[k + 1]);
        const double scale = std::pow(2.0 * M_PI / beta, 0.5 * double(D)) / std::sqrt(beta);
        return {scale * h, scale * se};
    }

private:
    double p_max_;
    std::vector<double> h_, se_;
};

/// Integral of |omega . u| over the unit sphere divided by |u|.
inline constexpr double abs_cosine_integral(int d) { return d == 2 ? 4.0 : 2.0 * M_PI; }

struct ContractionResult {
    double factor = 0.0;     ///< sup of the weighted output norm over the evaluated (t, s, V) for a unit input norm
    double se = 0.0;
    double t_at = 0.0;
    int s_at = 0;
    double speed_at = 0.0;
    bool contracting = false;
    bool divergent = false; ///< confidence interval spans more than a factor 10
};

struct ContractionGrid {
    int s_max = 64;
    std::vector<double> speeds{0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 40.0, 80.0};
    int t_points = 8;
    int u_points = 400;
};

/// Weighted norm at (t, s, all |v_i| = r) of the integrated collision term applied to the test sequence
/// h^{(s)}(u) = exp(-beta(u)|V_s|^2/2 - s mu(u)) of unit norm, with the kernel bounded in absolute value,
/// integrated over u in [u0, t].
template <std::size_t D>
inline std::pair<double, double> collision_tail(const NormWeights& w, const RelativeSpeedMoment<D>& G, double t,
                                                double u0, int s, double r, int u_points)
{
    const double cd = abs_cosine_integral(static_cast<int>(D));
    const double v2 = double(s) * r * r;
    // midpoint rule graded towards u = t
    double sum = 0.0, var = 0.0;
    const double L = t - u0;
    if (!(L > 0.0)) return {0.0, 0.0};
    for (int k = 0; k < u_points; ++k) {
        const double a = std::pow(double(k) / u_points, 2.0), b = std::pow(double(k + 1) / u_points, 2.0);
        const double tau = L * 0.5 * (a + b); // t - u
        const double du = L * (b - a);
        const double u = t - tau;
        auto [g, gse] = G(w.beta(u), r);
        const double f = std::exp(-w.mu(u) - w.lambda * tau * (double(s) + 0.5 * v2)) * cd * double(s) * du;
        sum += f * g;
        var += (f * gse) * (f * gse);
    }
    return {sum, std::sqrt(var)};
}

template <std::size_t D>
inline ContractionResult contraction_check(const NormWeights& w, const ContractionGrid& grid, std::size_t samples,
                                           std::uint64_t seed)
{
    w.validate();
    RelativeSpeedMoment<D> G(samples, seed);
    ContractionResult res;
    for (int it = 1; it <= grid.t_points; ++it) {
        const double t = w.T * double(it) / grid.t_points;
        for (int s = 1; s <= grid.s_max; s = (s < 8 ? s + 1 : s * 2))
            for (double r : grid.speeds) {
                auto [f, se] = collision_tail<D>(w, G, t, 0.0, s, r, grid.u_points);
                if (f > res.factor) {
                    res.factor = f;
                    res.se = se;
                    res.t_at = t;
                    res.s_at = s;
                    res.speed_at = r;
                }
            }
    }
    res.contracting = res.factor + z95 * res.se < 1.0;
    const double lo = res.factor - z95 * res.se, hi = res.factor + z95 * res.se;
    res.divergent = !(lo > 0.0) || hi / lo > 10.0;
    return res;
}

/// sup over the grid speeds of the tail integral over [u, t] at fixed s, for the left-continuity modulus.
template <std::size_t D>
inline double continuity_modulus(const NormWeights& w, const RelativeSpeedMoment<D>& G, double t, double u, int s,
                                 const ContractionGrid& grid)
{
    double m = 0.0;
    for (double r : grid.speeds) m = std::max(m, collision_tail<D>(w, G, t, u, s, r, grid.u_points).first);
    return m;
}

} // namespace hsgas
