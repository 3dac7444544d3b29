#include <algorithm>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "common.hpp"
#include "hsgas/duhamel.hpp"
#include "hsgas/ensemble.hpp"

namespace hsgas::exp {

namespace {

template <std::size_t D>
std::vector<std::vector<Vec<D>>> admissible_points(int s, double eps, const json& b)
{
    const int ni = get_or(b, "grid_i", 12), nj = get_or(b, "grid_j", 4);
    const double dx = get_or(b, "dx", 0.2), dy = get_or(b, "dy", 0.4);
    const auto rs = list_or(b, "partner_r", {1.0, 1.05, 1.5, 3.0});
    const auto th = list_or(b, "partner_theta", {0.0, 0.5 * std::numbers::pi, std::numbers::pi});
    std::vector<std::vector<Vec<D>>> pts;
    for (int i = 0; i <= ni; ++i)
        for (int j = 0; j <= nj; ++j) {
            Vec<D> x{};
            x[0] = 0.5 * eps + i * dx;
            x[1] = j * dy;
            if (s == 1) {
                pts.push_back({x});
                continue;
            }
            for (double r : rs)
                for (double a : th) {
                    Vec<D> y = x;
                    y[0] += r * eps * std::cos(a);
                    y[1] += r * eps * std::sin(a);
                    if (y[0] >= 0.5 * eps) pts.push_back({x, y});
                }
        }
    return pts;
}

template <std::size_t D>
Outcome marginals(const json& cfg, const Context& ctx)
{
    const json& b = block_of(cfg, "marginals");
    const int d = static_cast<int>(D);
    const auto f0 = data_of<D>(cfg);
    if (f0.homogeneous) throw ConfigError("marginals: needs a spatially localized profile");
    Outcome out;

    const json& ad = block_of(b, "admissible");
    if (get_or(ad, "enabled", true)) {
        const auto eps_list = list_or(ad, "eps_list", {0.05, 0.025, 0.0125, 0.00625});
        const auto s_list = get_or<std::vector<int>>(ad, "s_list", {1, 2});
        const std::size_t samples = get_or(ad, "samples", std::size_t(200'000));
        const double slo = get_or(ad, "slope_lo", 0.7), shi = get_or(ad, "slope_hi", 1.3);
        const double r2min = get_or(ad, "r2_min", 0.95);
        if (eps_list.size() < 2) throw ConfigError("marginals: eps_list needs two or more values");
        Csv c(ctx, out, "admissible.csv",
              {"s", "eps", "N", "partition", "partition_se", "sup_deviation", "se", "argmax", "points", "samples"});
        for (int s : s_list) {
            if (s < 1 || s > 2) throw ConfigError("marginals: s must be 1 or 2");
            std::vector<double> xs, ys;
            for (double eps : eps_list) {
                const long long N = std::llround(std::pow(eps, -(d - 1)));
                const auto pts = admissible_points<D>(s, eps, ad);
                const auto r = admissible_deviation<D>(f0, static_cast<int>(N), eps, pts, samples,
                                                       derive_seed(ctx.seed, {0xad00ULL, std::uint64_t(s)}),
                                                       ctx.shards);
                std::string where;
                for (const auto& x : pts[r.argmax])
                    for (std::size_t k = 0; k < D; ++k) where += (where.empty() ? "" : " ") + fmt17(x[k]);
                c << s << eps << N << r.partition << r.partition_se << r.sup_dev << r.se_at_sup << where << pts.size()
                  << r.samples;
                c.end_row();
                xs.push_back(eps);
                ys.push_back(r.sup_dev);
            }
            const LinearFit f = loglog_fit(xs, ys);
            const std::string tag = "s" + std::to_string(s);
            out.checks.push_back(make_check("admissible_slope_" + tag, f.slope, f.slope_se, f.slope - z95 * f.slope_se,
                                            f.slope + z95 * f.slope_se,
                                            "slope in [" + fmt17(slo) + ", " + fmt17(shi) + "]",
                                            f.slope >= slo && f.slope <= shi, samples * eps_list.size()));
            out.checks.push_back(make_check("admissible_r2_" + tag, f.r2, 0, f.r2, f.r2, "r2 >= " + fmt17(r2min),
                                            f.r2 >= r2min, samples * eps_list.size()));
        }
    }

    const json& hb = block_of(b, "histogram");
    const std::size_t reps = get_or(hb, "replicas", std::size_t(0));
    if (reps > 0) {
        const long long N = get_or(hb, "N", 64LL);
        const double eps = grad_eps(hb, N, d);
        const double t = get_or(hb, "t", 0.0);
        const int s = get_or(hb, "s", 1);
        if (s < 1 || s > N) throw ConfigError("marginals: histogram needs 1 <= s <= N");
        MarginalHistogram shape;
        shape.s = s;
        for (int p = 0; p < s; ++p) {
            shape.axes.push_back({p, false, 0, 0.0, 2.0, get_or(hb, "x_bins", 8)});
            shape.axes.push_back({p, true, 0, -2.0, 2.0, get_or(hb, "v_bins", 8)});
        }
        const std::size_t chunks = 64;
        std::vector<MarginalAccumulator> acc(chunks, MarginalAccumulator(shape, get_or(hb, "subset_cap", std::size_t(100))));
        const auto st = run_ensemble<D>(static_cast<int>(N), eps, f0, t, reps, derive_seed(ctx.seed, {0x415700ULL}),
                                        chunks, ctx.shards,
                                        [&](std::size_t ch, std::size_t, const Configuration<D>& Z) { acc[ch].add(Z); });
        MarginalAccumulator all = acc[0];
        for (std::size_t i = 1; i < chunks; ++i) all.merge(acc[i]);
        const MarginalHistogram h = all.result();
        Csv c(ctx, out, "histogram.csv", {"cell", "centers", "density", "density_se", "mass", "mass_se"});
        double total = 0.0, total_se2 = 0.0;
        for (std::size_t cell = 0; cell < h.cells(); ++cell) {
            std::string cs;
            for (double x : h.center(cell)) cs += (cs.empty() ? "" : " ") + fmt17(x);
            c << cell << cs << h.density(cell) << h.density_se(cell) << h.mass[cell] << h.mass_se[cell];
            c.end_row();
            total += h.mass[cell];
            total_se2 += h.mass_se[cell] * h.mass_se[cell];
        }
        const double se = std::sqrt(total_se2);
        out.checks.push_back(make_check("histogram_window_mass", total, se, total - z95 * se, total + z95 * se,
                                        "<= 1 + 3 se", total <= 1.0 + 3.0 * se, reps));
        out.checks.push_back(make_check("energy_drift", std::abs(st.energy_final - st.energy_initial) / st.energy_initial,
                                        0, 0, 0, "<= 1e-6", std::abs(st.energy_final - st.energy_initial) <=
                                                              1e-6 * st.energy_initial, reps));
        if (st.pathological_warning()) out.warnings.push_back("pathological fraction above 1%");
    }
    if (out.checks.empty()) throw ConfigError("marginals: nothing to do (admissible disabled and no histogram replicas)");
    return out;
}

struct Window {
    double xlo, xhi, vlo, vhi;
    int xb, vb;
    double bin_area() const { return (xhi - xlo) / xb * (vhi - vlo) / vb; }
    int bins() const { return xb * vb; }
    int locate(double x, double v) const
    {
        if (!(x >= xlo && x < xhi && v >= vlo && v < vhi)) return -1;
        const int i = std::clamp(static_cast<int>((x - xlo) / (xhi - xlo) * xb), 0, xb - 1);
        const int j = std::clamp(static_cast<int>((v - vlo) / (vhi - vlo) * vb), 0, vb - 1);
        return i * vb + j;
    }
};

Window window_of(const json& b)
{
    const auto xw = get_or<std::vector<double>>(b, "x1_window", {0.25, 1.75, 6});
    const auto vw = get_or<std::vector<double>>(b, "v1_window", {0.25, 2.25, 4});
    if (xw.size() != 3 || vw.size() != 3) throw ConfigError("converge: windows are [lo, hi, bins]");
    Window w{xw[0], xw[1], vw[0], vw[1], static_cast<int>(xw[2]), static_cast<int>(vw[2])};
    if (!(w.xhi > w.xlo) || !(w.vhi > w.vlo) || w.xb < 1 || w.vb < 1) throw ConfigError("converge: empty window");
    if (!(w.xlo > 0.0)) throw ConfigError("converge: the window must stay away from the wall (x1 lo > 0)");
    if (w.vlo <= 0.0 && w.vhi >= 0.0) throw ConfigError("converge: the window must exclude grazing velocities v1 = 0");
    return w;
}

/// Bin masses of the free-transport term over the (x1, v1) window, integrated over the other coordinates.
template <std::size_t D>
std::vector<double> free_bin_masses(const InitialData<D>& f0, const Window& w, double t, double R)
{
    const double s2 = f0.sigma * f0.sigma, b0 = f0.beta0;
    const double gperp = f0.g_norm() * std::pow(2.0 * M_PI * s2, 0.5 * (double(D) - 1));
    auto g1 = [&](double y) {
        y = std::abs(y);
        return gperp * std::exp(-(y - f0.x0[0]) * (y - f0.x0[0]) / (2.0 * s2));
    };
    auto m1 = [&](double v) { return std::sqrt(b0 / (2.0 * M_PI)) * std::exp(-0.5 * b0 * v * v); };
    auto perp = [&](double v) {
        const double r2 = R * R - v * v;
        if (!(r2 > 0.0)) return 0.0;
        if constexpr (D == 2) return boost::math::erf(std::sqrt(r2 * b0 / 2.0));
        else return 1.0 - std::exp(-0.5 * b0 * r2);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    std::vector<double> m(w.bins());
    const double hx = (w.xhi - w.xlo) / w.xb, hv = (w.vhi - w.vlo) / w.vb;
    for (int i = 0; i < w.xb; ++i)
        for (int j = 0; j < w.vb; ++j) {
            const double x0 = w.xlo + i * hx, v0 = w.vlo + j * hv;
            auto inner = [&](double v) {
                auto fx = [&](double x) { return g1(x - t * v); };
                return GK::integrate(fx, x0, x0 + hx, 15, 1e-13) * m1(v) * perp(v);
            };
            m[i * w.vb + j] = GK::integrate(inner, v0, v0 + hv, 15, 1e-13);
        }
    return m;
}

template <std::size_t D>
Outcome converge(const json& cfg, const Context& ctx)
{
    const json& b = block_of(cfg, "converge");
    const int d = static_cast<int>(D);
    const auto f0 = data_of<D>(cfg);
    if (f0.homogeneous) throw ConfigError("converge: needs a spatially localized profile");
    const CutoffParams c = truncation_of(cfg);
    const auto nw = weights_of(cfg);
    const double tprime = t_prime_ratio_of(cfg) * nw.T;
    const double t = get_or(b, "t", tprime);
    if (!(t > 0.0) || t > tprime * (1 + 1e-12)) throw ConfigError("converge: need 0 < t ≤ T'");
    const auto Ns = get_or<std::vector<long long>>(b, "N_list", {64, 128, 256});
    const std::size_t reps = get_or(b, "replicas", std::size_t(20'000));
    const std::size_t dsamples = get_or(b, "duhamel_samples", std::size_t(400'000));
    const std::size_t dblocks = get_or(b, "duhamel_blocks", std::size_t(32));
    const Window w = window_of(b);
    if (Ns.empty() || reps < 2 || dblocks < 2) throw ConfigError("converge: need N_list, replicas >= 2, blocks >= 2");

    // truncated Boltzmann series: k = 0 by quadrature, k >= 1 by tree sampling over the window
    const std::vector<double> m0 = free_bin_masses<D>(f0, w, t, c.R);
    const std::size_t per = std::max<std::size_t>(1, dsamples / dblocks);
    std::vector<std::vector<double>> blk(dblocks, std::vector<double>(w.bins(), 0.0));
    SamplerOptions so;
    so.surgery = false;
    so.simplex = SimplexMode::separated;
    parallel_for(dblocks, ctx.shards, [&](std::size_t bi) {
        Rng g = make_rng(ctx.seed, {0xd0d000ULL, bi});
        std::normal_distribution<double> n01;
        const double area = (w.xhi - w.xlo) * (w.vhi - w.vlo);
        const double sv = 1.0 / std::sqrt(f0.beta0);
        for (std::size_t m = 0; m < per; ++m) {
            Configuration<D> Z;
            ParticleState<D> q;
            q.x[0] = w.xlo + (w.xhi - w.xlo) * uniform01(g);
            q.v[0] = w.vlo + (w.vhi - w.vlo) * uniform01(g);
            double wt = area;
            for (std::size_t k = 1; k < D; ++k) {
                const double zx = n01(g), zv = n01(g);
                q.x[k] = f0.x0[k] + f0.sigma * zx;
                q.v[k] = sv * zv;
                wt *= std::sqrt(2.0 * M_PI) * f0.sigma * std::exp(0.5 * zx * zx);
                wt *= std::sqrt(2.0 * M_PI) * sv * std::exp(0.5 * zv * zv);
            }
            Z.p.push_back(q);
            const int cell = w.locate(q.x[0], q.v[0]);
            double val = 0.0;
            for (int k = 1; k <= c.n; ++k) val += draw_tree(g, Z, k, t, f0, c, so, true, false).zero;
            if (cell >= 0) blk[bi][cell] += wt * val;
        }
        for (auto& v : blk[bi]) v /= double(per);
    });
    std::vector<double> dm(w.bins()), dse(w.bins());
    for (int cbin = 0; cbin < w.bins(); ++cbin) {
        std::vector<double> col(dblocks);
        for (std::size_t bi = 0; bi < dblocks; ++bi) col[bi] = blk[bi][cbin];
        auto [mean, se] = mean_and_se(col);
        dm[cbin] = m0[cbin] + mean;
        dse[cbin] = se;
    }

    Outcome out;
    Csv dc(ctx, out, "distances.csv",
           {"N", "eps", "distance", "combined_se", "empirical_se_sum", "duhamel_se_sum", "replicas", "acceptance",
            "pathological_fraction", "collisions_per_particle", "energy_drift"});
    std::vector<double> dist, cse, epss;
    for (long long N : Ns) {
        const double eps = std::pow(double(N), -1.0 / double(d - 1));
        MarginalHistogram shape;
        shape.s = 1;
        shape.axes.push_back({0, false, 0, w.xlo, w.xhi, w.xb});
        shape.axes.push_back({0, true, 0, w.vlo, w.vhi, w.vb});
        const std::size_t chunks = 64;
        // s = 1: every particle of a replica contributes, the subset cap is lifted to N
        std::vector<MarginalAccumulator> acc(chunks, MarginalAccumulator(shape, static_cast<std::size_t>(N)));
        const auto st = run_ensemble<D>(static_cast<int>(N), eps, f0, t, reps,
                                        derive_seed(ctx.seed, {0xc0e7e5ULL, std::uint64_t(N)}), chunks, ctx.shards,
                                        [&](std::size_t ch, std::size_t, const Configuration<D>& Z) { acc[ch].add(Z); });
        MarginalAccumulator all = acc[0];
        for (std::size_t i = 1; i < chunks; ++i) all.merge(acc[i]);
        const MarginalHistogram h = all.result();
        Csv hc(ctx, out, "hist_N" + std::to_string(N) + ".csv",
               {"x1", "v1", "empirical_mass", "empirical_se", "duhamel_mass", "duhamel_se"});
        double L1 = 0.0, comb = 0.0, ese = 0.0, sse = 0.0;
        for (int cbin = 0; cbin < w.bins(); ++cbin) {
            const auto ctr = h.center(cbin);
            hc << ctr[0] << ctr[1] << h.mass[cbin] << h.mass_se[cbin] << dm[cbin] << dse[cbin];
            hc.end_row();
            L1 += std::abs(h.mass[cbin] - dm[cbin]);
            comb += std::hypot(h.mass_se[cbin], dse[cbin]);
            ese += h.mass_se[cbin];
            sse += dse[cbin];
        }
        const double drift = std::abs(st.energy_final - st.energy_initial) / st.energy_initial;
        dc << N << eps << L1 << comb << ese << sse << st.replicas << st.acceptance() << st.pathological_fraction()
           << 2.0 * double(st.pair_collisions) / double(st.replicas * N) << drift;
        dc.end_row();
        if (st.pathological_warning()) out.warnings.push_back("N = " + std::to_string(N) + ": pathological fraction above 1%");
        dist.push_back(L1);
        cse.push_back(comb);
        epss.push_back(eps);
        log_line(ctx, "converge N=" + std::to_string(N) + " distance " + fmt17(L1) + " se " + fmt17(comb));
    }
    bool decreasing = true, resolved = true;
    for (std::size_t i = 1; i < dist.size(); ++i) {
        decreasing &= dist[i] < dist[i - 1];
        resolved &= dist[i - 1] - dist[i] > cse[i - 1] + cse[i];
    }
    if (dist.size() > 1 && !resolved) out.warnings.push_back("inconclusive: distance steps within the error bars");
    if (dist.size() > 1) {
        out.checks.push_back(make_check("distance_strictly_decreasing", decreasing ? 1 : 0, 0, 0, 0,
                                        "strictly decreasing in N", decreasing, reps * Ns.size()));
        const LinearFit f = loglog_fit(epss, dist);
        out.checks.push_back(make_check("rate_in_eps", f.slope, f.slope_se, f.slope - z95 * f.slope_se,
                                        f.slope + z95 * f.slope_se, "informational", true, reps * Ns.size()));
    }
    out.checks.push_back(make_check("final_distance_over_se", dist.back() / cse.back(), 0, dist.back(), cse.back(),
                                    "distance <= 3 x combined se (interval = distance, se)",
                                    dist.back() <= 3.0 * cse.back(), reps));
    return out;
}

} // namespace

Outcome run_marginals(const json& cfg, const Context& ctx)
{
    return dimension_of(cfg) == 2 ? marginals<2>(cfg, ctx) : marginals<3>(cfg, ctx);
}

Outcome run_converge(const json& cfg, const Context& ctx)
{
    return dimension_of(cfg) == 2 ? converge<2>(cfg, ctx) : converge<3>(cfg, ctx);
}

} // namespace hsgas::exp
