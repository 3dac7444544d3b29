#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hsgas/vec.hpp"

namespace hsgas {

/// Absolute tolerance for geometric membership.
inline constexpr double geom_tol = 1e-12;
/// Unit vectors within this distance of the sphere are renormalized.
inline constexpr double unit_renorm_tol = 1e-9;

template <std::size_t D>
struct ParticleState {
    Vec<D> x{};
    Vec<D> v{};
};

template <std::size_t D>
struct Configuration {
    double eps = 0.0;
    std::vector<ParticleState<D>> p;

    std::size_t size() const { return p.size(); }
    ParticleState<D>& operator[](std::size_t i) { return p[i]; }
    const ParticleState<D>& operator[](std::size_t i) const { return p[i]; }
};

/// K(anchor, axis, radius): points whose component orthogonal to axis, measured from anchor, is at most radius.
template <std::size_t D>
struct Cylinder {
    Vec<D> anchor{};
    Vec<D> axis{};
    double radius = 0.0;
};

template <std::size_t D>
inline Vec<D> specular_reflect(const Vec<D>& v)
{
    Vec<D> r = v;
    r[0] = -r[0];
    return r;
}

/// S_eps(x) = x - 2 (x.e1) e1 + eps e1.
template <std::size_t D>
inline Vec<D> shifted_reflect(const Vec<D>& x, double eps)
{
    if (eps < 0.0) throw std::invalid_argument("shifted_reflect: eps < 0");
    Vec<D> r = x;
    r[0] = -r[0] + eps;
    return r;
}

/// Returns omega on the unit sphere, renormalizing small drift; throws otherwise.
template <std::size_t D>
inline Vec<D> checked_unit(const Vec<D>& omega)
{
    const double n = norm(omega);
    if (!(std::abs(1.0 - n) <= unit_renorm_tol))
        throw std::invalid_argument("scattering: omega is not a unit vector");
    if (n == 1.0) return omega;
    return (1.0 / n) * omega;
}

template <std::size_t D>
inline std::pair<Vec<D>, Vec<D>> scattering_map(const Vec<D>& v, const Vec<D>& vs, const Vec<D>& omega_in)
{
    const Vec<D> omega = checked_unit(omega_in);
    const double c = dot(v - vs, omega);
    return {v - c * omega, vs + c * omega};
}

/// Central finite-difference Jacobian determinant of (v, v*) -> (v', v*').
template <std::size_t D>
inline double scattering_jacobian_det(const Vec<D>& v, const Vec<D>& vs, const Vec<D>& omega, double h = 1e-5)
{
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("scattering_jacobian_det: degenerate step");
    constexpr int M = 2 * D;
    Eigen::Matrix<double, M, M> J;
    auto pack = [](const Vec<D>& a, const Vec<D>& b) {
        Eigen::Matrix<double, M, 1> z;
        for (std::size_t i = 0; i < D; ++i) {
            z[i] = a[i];
            z[D + i] = b[i];
        }
        return z;
    };
    for (int c = 0; c < M; ++c) {
        Vec<D> vp = v, vsp = vs, vm = v, vsm = vs;
        if (c < static_cast<int>(D)) {
            vp[c] += h;
            vm[c] -= h;
        } else {
            vsp[c - D] += h;
            vsm[c - D] -= h;
        }
        auto [ap, bp] = scattering_map(vp, vsp, omega);
        auto [am, bm] = scattering_map(vm, vsm, omega);
        J.col(c) = (pack(ap, bp) - pack(am, bm)) / (2.0 * h);
    }
    const double det = J.determinant();
    if (!std::isfinite(det)) throw std::runtime_error("scattering_jacobian_det: non-finite determinant");
    return det;
}

/// Wall and pair constraints of the hard-sphere phase space, within geom_tol.
template <std::size_t D>
inline bool phase_space_contains(const Configuration<D>& Z)
{
    const double wall = Z.eps > 0.0 ? 0.5 * Z.eps : 0.0;
    for (const auto& q : Z.p)
        if (q.x[0] < wall - geom_tol) return false;
    if (Z.eps > 0.0) {
        const double lim = Z.eps - geom_tol;
        const double lim2 = lim * lim;
        for (std::size_t i = 0; i < Z.size(); ++i)
            for (std::size_t j = i + 1; j < Z.size(); ++j)
                if (norm2(Z.p[i].x - Z.p[j].x) < lim2) return false;
    }
    return true;
}

/// Distance of x - anchor to the line R*axis.
template <std::size_t D>
inline double distance_to_axis(const Vec<D>& anchor, const Vec<D>& axis, const Vec<D>& x)
{
    const double a2 = norm2(axis);
    if (!(a2 > 0.0)) throw std::invalid_argument("cylinder: zero axis");
    const Vec<D> y = x - anchor;
    const double t = dot(y, axis) / a2;
    return norm(y - t * axis);
}

template <std::size_t D>
inline bool cylinder_contains(const Cylinder<D>& c, const Vec<D>& x)
{
    return distance_to_axis(c.anchor, c.axis, x) <= c.radius;
}

/// Length of the circle of radius r centred at e1-coordinate p that lies in the slab |y.e1| <= alpha.
inline double sphere_slab_arc_2d(double p, double r, double alpha)
{
    if (!(r > 0.0)) throw std::invalid_argument("sphere_slab_arc_2d: r <= 0");
    // a + b + c with the rounding error of both additions folded back in
    auto sum3 = [](double a, double b, double c) {
        const double s = a + b, bb = s - a, e = (a - (s - bb)) + (b - bb);
        const double t = s + c, cc = t - s, f = (s - (t - cc)) + (c - cc);
        return t + (e + f);
    };
    // acos(z) from 1 - z = lo / r and 1 + z = hi / r, which stays accurate near tangency
    auto ac = [r](double lo, double hi) {
        if (lo <= hi) return 2.0 * std::asin(std::sqrt(std::clamp(0.5 * lo / r, 0.0, 1.0)));
        return std::numbers::pi - 2.0 * std::asin(std::sqrt(std::clamp(0.5 * hi / r, 0.0, 1.0)));
    };
    const double upper = ac(sum3(r, alpha, p), sum3(r, -alpha, -p));
    const double lower = ac(sum3(r, -alpha, p), sum3(r, alpha, -p));
    return 2.0 * r * (upper - lower);
}

} // namespace hsgas
