#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "hsgas/geometry.hpp"
#include "hsgas/rng.hpp"

namespace hsgas {

/// f0(x, v) = g(x) M(v): a half-space-truncated Gaussian profile times a Maxwellian of inverse temperature beta0.
/// With homogeneous = true, g is identically 1 and f0 is normalized in velocity only.
template <std::size_t D>
struct InitialData {
    Vec<D> x0{};
    double sigma = 1.0;
    double beta0 = 1.0;
    bool homogeneous = false;

    void validate() const
    {
        if (!(beta0 > 0.0)) throw std::invalid_argument("initial data: beta0 <= 0");
        if (!homogeneous && !(sigma > 0.0)) throw std::invalid_argument("initial data: sigma <= 0");
        if (!all_finite(x0)) throw std::invalid_argument("initial data: non-finite centre");
    }

    /// 1 / integral of the untruncated profile over the half-space.
    double g_norm() const
    {
        if (homogeneous) return 1.0;
        const boost::math::normal nd;
        return 1.0 / (std::pow(2.0 * M_PI * sigma * sigma, 0.5 * D) * boost::math::cdf(nd, x0[0] / sigma));
    }

    double g(const Vec<D>& x) const
    {
        if (homogeneous) return 1.0;
        if (x[0] < 0.0) return 0.0;
        return g_norm() * std::exp(-norm2(x - x0) / (2.0 * sigma * sigma));
    }

    double maxwellian(const Vec<D>& v) const
    {
        return std::pow(beta0 / (2.0 * M_PI), 0.5 * D) * std::exp(-0.5 * beta0 * norm2(v));
    }

    double density(const ParticleState<D>& p) const { return g(p.x) * maxwellian(p.v); }

    double tensor_density(const Configuration<D>& Z) const
    {
        double f = 1.0;
        for (const auto& q : Z.p) f *= density(q);
        return f;
    }

    /// -log of sup_{x,v} f0 exp(beta0 |v|^2 / 2).
    double mu0() const { return -std::log(g_norm() * std::pow(beta0 / (2.0 * M_PI), 0.5 * D)); }

    /// Lipschitz constant of sqrt(g) in x.
    double sqrt_g_lipschitz() const
    {
        if (homogeneous) return 0.0;
        return std::sqrt(g_norm()) * std::exp(-0.5) / (std::sqrt(2.0) * sigma);
    }

    ParticleState<D> sample(Rng& rng) const
    {
        if (homogeneous) throw std::logic_error("initial data: homogeneous profile cannot be sampled in x");
        std::normal_distribution<double> n01(0.0, 1.0);
        const boost::math::normal nd;
        ParticleState<D> p;
        // inverse-CDF draw of the truncated normal coordinate x.e1 > 0
        const double lo = boost::math::cdf(nd, -x0[0] / sigma);
        double u = lo + (1.0 - lo) * uniform01(rng);
        u = std::clamp(u, 1e-300, 1.0 - 1e-16);
        p.x[0] = std::max(0.0, x0[0] + sigma * boost::math::quantile(nd, u));
        for (std::size_t k = 1; k < D; ++k) p.x[k] = x0[k] + sigma * n01(rng);
        const double sv = 1.0 / std::sqrt(beta0);
        for (std::size_t k = 0; k < D; ++k) p.v[k] = sv * n01(rng);
        return p;
    }
};

} // namespace hsgas
