#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "hsgas/vec.hpp"

namespace hsgas {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of an independent stream identified by a path of integers below the master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path)
{
    std::uint64_t s = splitmix64(master);
    for (auto p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path)
{
    return Rng(derive_seed(master, path));
}

inline double uniform01(Rng& g)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

template <std::size_t D>
inline Vec<D> sample_unit_sphere(Rng& g)
{
    std::normal_distribution<double> n(0.0, 1.0);
    for (;;) {
        Vec<D> w;
        for (auto& c : w) c = n(g);
        const double r = norm(w);
        if (r > 1e-300) return (1.0 / r) * w;
    }
}

template <std::size_t D>
inline Vec<D> sample_ball(Rng& g, double R)
{
    const Vec<D> u = sample_unit_sphere<D>(g);
    const double r = R * std::pow(uniform01(g), 1.0 / D);
    return r * u;
}

} // namespace hsgas
