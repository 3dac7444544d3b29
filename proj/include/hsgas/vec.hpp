#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace hsgas {

/// Fixed-dimension real vector, D in {2,3}.
template <std::size_t D>
using Vec = std::array<double, D>;

template <std::size_t D>
inline Vec<D> operator+(const Vec<D>& a, const Vec<D>& b)
{
    Vec<D> r;
    for (std::size_t i = 0; i < D; ++i) r[i] = a[i] + b[i];
    return r;
}

template <std::size_t D>
inline Vec<D> operator-(const Vec<D>& a, const Vec<D>& b)
{
    Vec<D> r;
    for (std::size_t i = 0; i < D; ++i) r[i] = a[i] - b[i];
    return r;
}

template <std::size_t D>
inline Vec<D> operator-(const Vec<D>& a)
{
    Vec<D> r;
    for (std::size_t i = 0; i < D; ++i) r[i] = -a[i];
    return r;
}

template <std::size_t D>
inline Vec<D> operator*(double s, const Vec<D>& a)
{
    Vec<D> r;
    for (std::size_t i = 0; i < D; ++i) r[i] = s * a[i];
    return r;
}

template <std::size_t D>
inline Vec<D>& operator+=(Vec<D>& a, const Vec<D>& b)
{
    for (std::size_t i = 0; i < D; ++i) a[i] += b[i];
    return a;
}

template <std::size_t D>
inline Vec<D>& operator-=(Vec<D>& a, const Vec<D>& b)
{
    for (std::size_t i = 0; i < D; ++i) a[i] -= b[i];
    return a;
}

template <std::size_t D>
inline double dot(const Vec<D>& a, const Vec<D>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < D; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t D>
inline double norm2(const Vec<D>& a) { return dot(a, a); }

template <std::size_t D>
inline double norm(const Vec<D>& a) { return std::sqrt(dot(a, a)); }

template <std::size_t D>
inline Vec<D> e1()
{
    Vec<D> r{};
    r[0] = 1.0;
    return r;
}

template <std::size_t D>
inline bool all_finite(const Vec<D>& a)
{
    for (double c : a)
        if (!std::isfinite(c)) return false;
    return true;
}

/// Surface area of the unit sphere S^{D-1}.
template <std::size_t D>
constexpr double sphere_area()
{
    if constexpr (D == 2) return 2.0 * std::numbers::pi;
    else return 4.0 * std::numbers::pi;
}

/// Volume of the ball of radius r in R^D.
template <std::size_t D>
inline double ball_volume(double r)
{
    if constexpr (D == 2) return std::numbers::pi * r * r;
    else return 4.0 / 3.0 * std::numbers::pi * r * r * r;
}

} // namespace hsgas
