#include <algorithm>

#include "common.hpp"
#include "hsgas/ensemble.hpp"
#include "hsgas/hard_sphere.hpp"
#include "hsgas/parallel.hpp"

namespace hsgas::exp {

namespace {

template <std::size_t D>
Outcome simulate(const json& cfg, const Context& ctx)
{
    const json& b = block_of(cfg, "simulate");
    const int d = static_cast<int>(D);
    const auto f0 = data_of<D>(cfg);
    const long long N = get_or(b, "N", 10LL);
    const double eps = grad_eps(b, N, d);
    const double tmf = mean_free_time(N, eps, d, f0.beta0);
    const double t = b.contains("t") ? get_or(b, "t", 1.0) : get_or(b, "t_mft", 5.0) * tmf;
    const std::size_t reps = get_or(b, "replicas", std::size_t(100));
    const double tol = get_or(b, "tol", 1e-8);
    const double need = get_or(b, "min_pass_fraction", 0.99);
    if (!(t >= 0.0) || reps == 0) throw ConfigError("simulate: need t >= 0 and replicas > 0");

    struct Row {
        std::size_t attempts = 0, pairs = 0, walls = 0;
        double e0 = 0, e1 = 0, p0 = 0, p1 = 0, err = 0, gap = inf;
        bool path = false;
        Configuration<D> Z, F;
    };
    std::vector<Row> rows(reps);
    parallel_for(reps, ctx.shards, [&](std::size_t r) {
        Rng g = make_rng(ctx.seed, {0x51a100ULL, r});
        Row& w = rows[r];
        const auto s = sample_initial(g, static_cast<int>(N), eps, f0);
        w.attempts = s.attempts;
        w.Z = s.Z;
        FlowParams prm;
        prm.record_events = false;
        EventSim<D> fwd(s.Z, prm);
        fwd.run_until(t);
        w.F = fwd.state();
        w.pairs = fwd.pair_collisions();
        w.walls = fwd.wall_bounces();
        w.gap = fwd.min_event_gap();
        w.path = fwd.pathological();
        const auto back = advance(w.F, -t, prm);
        w.path |= back.pathological;
        for (std::size_t i = 0; i < s.Z.size(); ++i)
            for (std::size_t k = 0; k < D; ++k) {
                w.err = std::max(w.err, std::abs(back.final.p[i].x[k] - s.Z.p[i].x[k]));
                w.err = std::max(w.err, std::abs(back.final.p[i].v[k] - s.Z.p[i].v[k]));
            }
        w.e0 = kinetic_energy_of(s.Z);
        w.e1 = kinetic_energy_of(w.F);
        for (const auto& q : s.Z.p) w.p0 += q.v[D - 1];
        for (const auto& q : w.F.p) w.p1 += q.v[D - 1];
    });

    Outcome out;
    Csv c(ctx, out, "simulate.csv",
          {"replica", "attempts", "pair_collisions", "wall_bounces", "energy_0", "energy_t", "tangential_momentum_0",
           "tangential_momentum_t", "reversal_error", "min_event_gap", "pathological"});
    std::size_t good = 0, path = 0, pairs = 0;
    double eworst = 0.0, pworst = 0.0, ework = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const Row& w = rows[r];
        c << r << w.attempts << w.pairs << w.walls << w.e0 << w.e1 << w.p0 << w.p1 << w.err << w.gap << int(w.path);
        c.end_row();
        if (!w.path && w.err <= tol) ++good;
        path += w.path;
        pairs += w.pairs;
        eworst = std::max(eworst, std::abs(w.e1 - w.e0) / w.e0);
        pworst = std::max(pworst, std::abs(w.p1 - w.p0) / std::max(1.0, std::sqrt(2.0 * w.e0)));
        ework = std::max(ework, w.err);
    }
    Csv st(ctx, out, "states.csv", {"replica", "time", "particle", "x", "v"});
    for (std::size_t r = 0; r < std::min<std::size_t>(reps, 10); ++r)
        for (const auto* Z : {&rows[r].Z, &rows[r].F})
            for (std::size_t i = 0; i < Z->size(); ++i) {
                st << r << (Z == &rows[r].Z ? 0.0 : t) << i;
                std::string xs, vs;
                for (std::size_t k = 0; k < D; ++k) {
                    xs += (k ? " " : "") + fmt17(Z->p[i].x[k]);
                    vs += (k ? " " : "") + fmt17(Z->p[i].v[k]);
                }
                st << xs << vs;
                st.end_row();
            }

    const double frac = double(good) / double(reps);
    out.checks.push_back(make_check("reversal_pass_fraction", frac, 0.0, frac, frac,
                                    ">= " + fmt17(need) + " of replicas reversed within " + fmt17(tol), frac >= need,
                                    reps));
    out.checks.push_back(make_check("reversal_worst_error", ework, 0.0, ework, ework, "informational", true, reps));
    out.checks.push_back(make_check("energy_relative_error", eworst, 0.0, eworst, eworst, "<= 1e-10", eworst <= 1e-10,
                                    reps));
    out.checks.push_back(make_check("tangential_momentum_error", pworst, 0.0, pworst, pworst, "<= 1e-10",
                                    pworst <= 1e-10, reps));
    out.checks.push_back(make_check("collisions_per_particle", 2.0 * double(pairs) / double(reps * N), 0.0, 0, 0,
                                    "informational, t = " + fmt17(t / tmf) + " mean free times", true, reps));
    if (path) out.warnings.push_back(std::to_string(path) + " pathological replicas");
    return out;
}

template <std::size_t D>
Outcome pathology(const json& cfg, const Context& ctx)
{
    const json& b = block_of(cfg, "pathology");
    const int N = get_or(b, "N", 20);
    const double eps = get_or(b, "eps", 0.05);
    const double R = get_or(b, "R", 1.0);
    const double t = get_or(b, "t", 1.0);
    const std::size_t samples = get_or(b, "samples", std::size_t(2000));
    auto tols = list_or(b, "gap_tols", {1e-3, 1e-4, 1e-5, 1e-6});
    std::sort(tols.begin(), tols.end(), std::greater<>());
    if (N < 2 || !(eps > 0.0) || !(R > eps) || !(t > 0.0)) throw ConfigError("pathology: need N >= 2, 0 < eps < R, t > 0");

    // per-sample verdicts so the work can be split across shards
    std::vector<std::vector<char>> flag(samples, std::vector<char>(tols.size(), 0));
    std::vector<std::size_t> rej(samples, 0);
    parallel_for(samples, ctx.shards, [&](std::size_t s) {
        Rng g = make_rng(ctx.seed, {0x9a7401ULL, s});
        const Configuration<D> Z = sample_box_configuration<D>(g, N, eps, R, rej[s]);
        for (std::size_t k = 0; k < tols.size(); ++k) {
            FlowParams p;
            p.gap_tol = tols[k];
            p.record_events = false;
            flag[s][k] = advance(Z, t, p).pathological;
        }
    });
    Outcome out;
    Csv c(ctx, out, "pathology.csv", {"gap_tol", "flagged", "samples", "fraction", "ci_lo", "ci_hi"});
    std::vector<double> frac;
    bool monotone = true;
    std::size_t first = 0, last = 0;
    for (std::size_t k = 0; k < tols.size(); ++k) {
        std::size_t n = 0;
        for (std::size_t s = 0; s < samples; ++s) n += flag[s][k];
        if (k == 0) first = n;
        last = n;
        auto [lo, hi] = wilson_interval(n, samples);
        frac.push_back(double(n) / double(samples));
        c << tols[k] << n << samples << frac.back() << lo << hi;
        c.end_row();
        if (k > 0 && frac[k] > frac[k - 1]) monotone = false;
    }
    const double span = std::log10(tols.front() / tols.back());
    out.checks.push_back(make_check("fraction_monotone", monotone ? 1 : 0, 0, 0, 0,
                                    "non-increasing as gap_tol decreases", monotone, samples));
    out.checks.push_back(make_check("fraction_at_largest_tol", frac.front(), 0, wilson_interval(first, samples).first,
                                    wilson_interval(first, samples).second, "> 0 (non-vacuous probe)", first > 0,
                                    samples));
    out.checks.push_back(make_check("fraction_at_smallest_tol", frac.back(), 0, wilson_interval(last, samples).first,
                                    wilson_interval(last, samples).second, "== 0", last == 0, samples));
    out.checks.push_back(make_check("decades_spanned", span, 0, span, span, ">= 3", span >= 3 - 1e-9, samples));
    return out;
}

} // namespace

Outcome run_simulate(const json& cfg, const Context& ctx)
{
    return dimension_of(cfg) == 2 ? simulate<2>(cfg, ctx) : simulate<3>(cfg, ctx);
}

Outcome run_pathology(const json& cfg, const Context& ctx)
{
    return dimension_of(cfg) == 2 ? pathology<2>(cfg, ctx) : pathology<3>(cfg, ctx);
}

} // namespace hsgas::exp
