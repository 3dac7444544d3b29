#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hsgas/geometry.hpp"

namespace hsgas {

/// Point particle transport by t with specular reflection at x.e1 = 0; valid for either sign of t.
template <std::size_t D>
inline ParticleState<D> free_transport(const ParticleState<D>& p, double t)
{
    ParticleState<D> r{p.x + t * p.v, p.v};
    if (r.x[0] < 0.0) {
        r.x[0] = -r.x[0];
        r.v[0] = -r.v[0];
    }
    return r;
}

template <std::size_t D>
inline Configuration<D> free_transport(const Configuration<D>& Z, double t)
{
    Configuration<D> r = Z;
    for (auto& q : r.p) q = free_transport(q, t);
    return r;
}

/// Time along the backward flow at which the particle meets the wall, if it does.
template <std::size_t D>
inline std::optional<double> backward_bounce_time(const ParticleState<D>& p)
{
    if (!(p.v[0] > 0.0)) return std::nullopt;
    return p.x[0] / p.v[0];
}

/// Exact infimum over tau in (0, horizon] of the distance between the two particles along the backward free flow.
template <std::size_t D>
inline double min_future_pair_distance(const ParticleState<D>& p1, const ParticleState<D>& p2,
                                       std::optional<double> horizon = std::nullopt)
{
    const double H = horizon ? *horizon : std::numeric_limits<double>::infinity();
    std::vector<double> cuts{0.0};
    for (const auto* p : {&p1, &p2})
        if (auto tb = backward_bounce_time(*p); tb && *tb < H) cuts.push_back(*tb);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(H);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        if (!(b >= a)) continue;
        // on [a, b] both particles move linearly; use the state at a and backward velocities there
        const double mid = (b < std::numeric_limits<double>::infinity()) ? 0.5 * (a + b) : a + 1.0;
        const ParticleState<D> q1 = free_transport(p1, -mid), q2 = free_transport(p2, -mid);
        // positions at tau = a obtained by moving back from mid along the current branch
        const Vec<D> y = (q2.x - q1.x) + (mid - a) * (q2.v - q1.v);
        const Vec<D> w = -(q2.v - q1.v);
        const double w2 = norm2(w);
        double s = 0.0;
        if (w2 > 0.0) s = std::clamp(-dot(y, w) / w2, 0.0, b - a);
        best = std::min(best, norm(y + s * w));
    }
    return best;
}

/// Free-flow good configuration: every pair stays farther than c along the backward free flow.
template <std::size_t D>
inline bool good_config_free(const Configuration<D>& Z, double c)
{
    for (std::size_t i = 0; i < Z.size(); ++i)
        for (std::size_t j = i + 1; j < Z.size(); ++j)
            if (!(min_future_pair_distance(Z.p[i], Z.p[j]) > c)) return false;
    return true;
}

} // namespace hsgas
