#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hsgas/cutoffs.hpp"
#include "hsgas/initial_data.hpp"
#include "hsgas/parallel.hpp"
#include "hsgas/pseudo.hpp"
#include "hsgas/rng.hpp"
#include "hsgas/stats.hpp"

namespace hsgas {

/// (N-s)(N-s-1)...(N-s-k+1) eps^{k(d-1)}.
inline double prefactor(long long N, int s, int k, double eps, int d)
{
    if (s + k > N) throw std::invalid_argument("prefactor: s + k > N");
    double p = 1.0;
    const double e = std::pow(eps, d - 1);
    for (int i = 0; i < k; ++i) p *= double(N - s - i) * e;
    return p;
}

enum class DuhamelMode { boltzmann, hybrid };

/// Adjunction times t > t_1 > ... > t_k > 0 with t_{i-1} - t_i >= delta for i >= 2.
/// How they are drawn: exact uniform draw on the delta-separated simplex,
/// or uniform on the full simplex with the gap constraint as an indicator (shares draws across delta).
enum class SimplexMode { separated, indicator };

struct SamplerOptions {
    std::size_t samples = 10000;
    std::size_t replicas = 16;
    std::uint64_t seed = 1;
    bool surgery = false;
    double sample_radius = 0.0; ///< radius of the velocity ball the v_{s+i} are drawn from; 0 means cuts.R
    SimplexMode simplex = SimplexMode::separated;
    unsigned threads = 1; ///< 0 selects the hardware concurrency; results do not depend on it
};

struct TermEstimate {
    double value = 0.0;
    double se = 0.0;
    double abs_value = 0.0; ///< same estimator with the kernel replaced by its absolute value
    double abs_se = 0.0;
    std::size_t samples = 0;
    std::size_t invalid = 0;  ///< overlapping eps-adjunctions or sign mismatch (contribute zero)
    std::size_t excluded = 0; ///< removed by surgery
    int k = 0;
};

/// One tree draw evaluated along the 0- and eps-pseudo-trajectories with shared random numbers.
struct TreeDraw {
    double zero = 0.0, zero_abs = 0.0;
    double eps = 0.0, eps_abs = 0.0;
    bool eps_invalid = false;
    bool excluded = false;
};

template <std::size_t D>
inline double simplex_volume(double t, int k, double delta)
{
    if (k == 0) return 1.0;
    const double L = t - (k - 1) * delta;
    if (L < 0.0) return 0.0;
    return std::pow(L, k) / std::tgamma(k + 1.0);
}

/// Draws one collision tree (s, k) rooted at Zs at time t and evaluates its integrand.
template <std::size_t D>
inline TreeDraw draw_tree(Rng& g, const Configuration<D>& Zs, int k, double t, const InitialData<D>& f0,
                          const CutoffParams& cuts, const SamplerOptions& opt, bool want_zero, bool want_eps)
{
    TreeDraw out;
    const int s = static_cast<int>(Zs.size());
    const double Rs = opt.sample_radius > 0.0 ? opt.sample_radius : cuts.R;

    // times, always consuming exactly k uniforms
    std::vector<double> u(k);
    for (auto& x : u) x = uniform01(g);
    std::sort(u.begin(), u.end(), std::greater<>());
    std::vector<double> times(k);
    double W = 1.0;
    bool live = true;
    if (opt.simplex == SimplexMode::separated) {
        const double L = t - (k - 1) * cuts.delta;
        if (L < 0.0) live = false;
        for (int i = 0; i < k; ++i) times[i] = u[i] * std::max(L, 0.0) + (k - 1 - i) * cuts.delta;
        W = simplex_volume<D>(t, k, cuts.delta);
    } else {
        for (int i = 0; i < k; ++i) {
            times[i] = u[i] * t;
            if (i > 0 && times[i - 1] - times[i] < cuts.delta) live = false;
        }
        W = std::pow(t, k) / std::tgamma(k + 1.0);
    }
    // labels and parameters, drawn unconditionally to keep streams aligned
    std::vector<int> labels(k);
    std::vector<Vec<D>> omega(k), vel(k);
    for (int i = 0; i < k; ++i) {
        labels[i] = static_cast<int>(uniform01(g) * (s + i));
        labels[i] = std::min(labels[i], s + i - 1);
        omega[i] = sample_unit_sphere<D>(g);
        vel[i] = sample_ball<D>(g, Rs);
        W *= double(s + i) * sphere_area<D>() * ball_volume<D>(Rs);
    }
    if (!live) return out;

    double e2 = 0.0;
    for (const auto& q : Zs.p) e2 += norm2(q.v);
    for (const auto& v : vel) e2 += norm2(v);
    if (e2 > cuts.R * cuts.R) return out;

    PseudoBuilder<D> b0(Zs, t, PseudoKind::zero, 0.0);
    std::optional<PseudoBuilder<D>> be;
    if (want_eps) be.emplace(Zs, t, PseudoKind::eps, cuts.eps);
    double k0 = 1.0, ke = 1.0;
    bool eps_ok = want_eps;
    for (int i = 0; i < k; ++i) {
        b0.transport_to(times[i]);
        const int j = labels[i];
        const Configuration<D>& Zbar = b0.config();
        if (opt.surgery) {
            if (Zbar.p[j].x[0] < cuts.rho || surgery_excluded(Zbar, j, omega[i], vel[i], cuts) != Exclusion::none) {
                out.excluded = true;
                return out;
            }
        }
        const double c0 = dot(omega[i], vel[i] - Zbar.p[j].v);
        if (c0 == 0.0) return out;
        k0 *= c0;
        b0.adjoin(j, omega[i], vel[i], c0 > 0.0 ? 1 : -1);
        if (eps_ok) {
            if (be->transport_to(times[i]) != BuildStatus::ok) {
                eps_ok = false;
                out.eps_invalid = true;
                continue;
            }
            const double ce = dot(omega[i], vel[i] - be->config().p[j].v);
            if (ce == 0.0 || be->adjoin(j, omega[i], vel[i], ce > 0.0 ? 1 : -1) != BuildStatus::ok) {
                eps_ok = false;
                out.eps_invalid = true;
                continue;
            }
            ke *= ce;
        }
    }
    if (want_zero) {
        b0.transport_to(0.0);
        const double f = f0.tensor_density(b0.config());
        out.zero = W * k0 * f;
        out.zero_abs = W * std::abs(k0) * f;
    }
    if (eps_ok) {
        if (be->transport_to(0.0) != BuildStatus::ok) {
            out.eps_invalid = true;
        } else {
            const double f = f0.tensor_density(be->config());
            out.eps = W * ke * f;
            out.eps_abs = W * std::abs(ke) * f;
        }
    }
    return out;
}

/// k = 0 term: free transport of the tensorized data with the energy indicator.
template <std::size_t D>
inline double free_term(const Configuration<D>& Zs, double t, const InitialData<D>& f0, double R)
{
    double e2 = 0.0;
    for (const auto& q : Zs.p) e2 += norm2(q.v);
    if (e2 > R * R) return 0.0;
    Configuration<D> Z = Zs;
    Z.eps = 0.0;
    return f0.tensor_density(free_transport(Z, -t));
}

/// Estimate of the summed elementary terms of order k at Zs.
template <std::size_t D>
inline TermEstimate estimate_term(const Configuration<D>& Zs, int k, double t, const InitialData<D>& f0,
                                  const CutoffParams& cuts, DuhamelMode mode, const SamplerOptions& opt)
{
    if (k < 0) throw std::invalid_argument("estimate_term: k < 0");
    if (!cuts.violations().empty() && opt.surgery)
        throw std::invalid_argument("estimate_term: cut-off parameters violate " + cuts.violations().front());
    TermEstimate r;
    r.k = k;
    if (k == 0) {
        r.value = r.abs_value = free_term(Zs, t, f0, cuts.R);
        r.samples = 1;
        return r;
    }
    const std::size_t reps = std::max<std::size_t>(1, opt.replicas);
    const std::size_t per = std::max<std::size_t>(1, opt.samples / reps);
    std::vector<double> mv(reps), ma(reps);
    std::vector<std::size_t> nexc(reps, 0), ninv(reps, 0);
    parallel_for(reps, opt.threads, [&](std::size_t rep) {
        Rng g = make_rng(opt.seed, {0xd0a3e1ULL, std::uint64_t(k), rep});
        double sv = 0.0, sa = 0.0;
        for (std::size_t n = 0; n < per; ++n) {
            const TreeDraw d =
                draw_tree(g, Zs, k, t, f0, cuts, opt, mode == DuhamelMode::boltzmann, mode == DuhamelMode::hybrid);
            if (d.excluded) ++nexc[rep];
            if (mode == DuhamelMode::boltzmann) {
                sv += d.zero;
                sa += d.zero_abs;
            } else {
                if (d.eps_invalid) ++ninv[rep];
                sv += d.eps;
                sa += d.eps_abs;
            }
        }
        mv[rep] = sv / double(per);
        ma[rep] = sa / double(per);
    });
    for (std::size_t rep = 0; rep < reps; ++rep) {
        r.excluded += nexc[rep];
        r.invalid += ninv[rep];
    }
    r.samples = reps * per;
    std::tie(r.value, r.se) = mean_and_se(mv);
    std::tie(r.abs_value, r.abs_se) = mean_and_se(ma);
    return r;
}

struct SolutionEstimate {
    double value = 0.0;
    double se = 0.0;
    std::vector<TermEstimate> terms; ///< k = 0..n
};

/// Truncated Duhamel series at each grid point (Boltzmann pseudo-trajectories).
template <std::size_t D>
inline std::vector<SolutionEstimate> estimate_solution(const std::vector<Configuration<D>>& grid, double t,
                                                       const InitialData<D>& f0, const CutoffParams& cuts,
                                                       const SamplerOptions& opt)
{
    std::vector<SolutionEstimate> out;
    out.reserve(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        SolutionEstimate e;
        SamplerOptions o = opt;
        o.seed = derive_seed(opt.seed, {0x9e1d00ULL, p});
        double var = 0.0;
        for (int k = 0; k <= cuts.n; ++k) {
            TermEstimate te = estimate_term(grid[p], k, t, f0, cuts, DuhamelMode::boltzmann, o);
            e.value += te.value;
            var += te.se * te.se;
            e.terms.push_back(te);
        }
        e.se = std::sqrt(var);
        out.push_back(std::move(e));
    }
    return out;
}

struct HybridComparison {
    double sup_diff = 0.0;      ///< sup over points of |boltzmann - hybrid|
    double se_at_sup = 0.0;     ///< standard error of the difference at the maximizing point
    std::size_t argmax = 0;
    std::vector<double> diff, se;
    std::size_t invalid = 0;
};

/// Boltzmann minus hybrid truncated series with common random numbers, per grid point.
template <std::size_t D>
inline HybridComparison compare_boltzmann_hybrid(const std::vector<Configuration<D>>& grid, double t,
                                                 const InitialData<D>& f0, const CutoffParams& cuts,
                                                 const SamplerOptions& opt_in)
{
    SamplerOptions opt = opt_in;
    opt.surgery = true;
    HybridComparison hc;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        Configuration<D> Z = grid[p];
        Z.eps = cuts.eps;
        if (const auto dv = domain_predicates(Z, cuts); !dv.in_delta)
            throw std::invalid_argument("compare_boltzmann_hybrid: grid point outside the convergence domain (" +
                                        dv.failing_clause + ")");
        const std::size_t reps = std::max<std::size_t>(1, opt.replicas);
        const std::size_t per = std::max<std::size_t>(1, opt.samples / reps);
        std::vector<double> md(reps, 0.0);
        std::vector<std::size_t> ninv(reps, 0);
        parallel_for(reps, opt.threads, [&](std::size_t rep) {
            for (int k = 1; k <= cuts.n; ++k) {
                Rng g = make_rng(opt.seed, {0xc0447aULL, p, std::uint64_t(k), rep});
                double sd = 0.0;
                for (std::size_t n = 0; n < per; ++n) {
                    const TreeDraw d = draw_tree(g, Z, k, t, f0, cuts, opt, true, true);
                    if (d.eps_invalid) ++ninv[rep];
                    sd += d.zero - d.eps;
                }
                md[rep] += sd / double(per);
            }
        });
        for (auto c : ninv) hc.invalid += c;
        auto [m, se] = mean_and_se(md);
        hc.diff.push_back(m);
        hc.se.push_back(se);
        if (std::abs(m) >= hc.sup_diff) {
            hc.sup_diff = std::abs(m);
            hc.se_at_sup = se;
            hc.argmax = p;
        }
    }
    return hc;
}

} // namespace hsgas
