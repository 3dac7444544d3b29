#include <limits>

#include "common.hpp"
#include "hsgas/norms.hpp"
#include "hsgas/stats.hpp"

namespace hsgas::exp {

namespace {

template <std::size_t D>
Outcome contraction(const json& cfg, const Context& ctx)
{
    const json& b = block_of(cfg, "contraction");
    const NormWeights w = weights_of(cfg);
    const std::size_t samples = get_or(b, "samples", std::size_t(20'000));
    ContractionGrid grid;
    grid.s_max = get_or(b, "s_max", grid.s_max);
    grid.t_points = get_or(b, "t_points", grid.t_points);
    grid.u_points = get_or(b, "u_points", grid.u_points);
    grid.speeds = get_or(b, "speeds", grid.speeds);
    const auto fracs = list_or(b, "T_fractions", {0.125, 0.25, 0.5, 1.0});
    const int mod_points = get_or(b, "modulus_points", 6);
    const int first = get_or(b, "modulus_first_halving", 4);
    if (grid.s_max < 1 || grid.t_points < 1 || grid.u_points < 1) throw ConfigError("contraction: bad grid");
    const std::uint64_t seed = derive_seed(ctx.seed, {0xc0c0ULL});

    // speeds beyond the tabulated range are not representable
    for (double r : grid.speeds)
        if (r * std::sqrt(w.beta0) > 200.0) throw ConfigError("contraction: speed beyond the tabulated range");

    const ContractionResult main = contraction_check<D>(w, grid, samples, seed);
    Outcome out;
    Csv c(ctx, out, "contraction.csv", {"T", "factor", "se", "t_at", "s_at", "speed_at", "contracting"});
    std::vector<double> factors;
    for (double fr : fracs) {
        NormWeights wf = w;
        wf.T = fr * w.T;
        const ContractionResult r = contraction_check<D>(wf, grid, samples, seed);
        factors.push_back(r.factor);
        c << wf.T << r.factor << r.se << r.t_at << r.s_at << r.speed_at << int(r.contracting);
        c.end_row();
    }
    bool monotone = true;
    for (std::size_t i = 1; i < factors.size(); ++i) monotone &= factors[i] > factors[i - 1];

    const RelativeSpeedMoment<D> G(samples, seed);
    Csv mc(ctx, out, "modulus.csv", {"s", "t_minus_u", "modulus"});
    const auto mod_s = get_or<std::vector<int>>(b, "modulus_s", {1, 8, 64});
    double worst = std::numeric_limits<double>::infinity(), worst_se = 0.0;
    for (int s : mod_s) {
        if (s < 1) throw ConfigError("contraction: modulus_s entries must be >= 1");
        std::vector<double> hs, ms;
        for (int j = 0; j < mod_points; ++j) {
            const double h = w.T * std::pow(0.5, j + first);
            const double m = continuity_modulus<D>(w, G, w.T, w.T - h, s, grid);
            mc << s << h << m;
            mc.end_row();
            hs.push_back(h);
            ms.push_back(m);
        }
        const LinearFit mf = loglog_fit(hs, ms);
        if (mf.slope < worst) {
            worst = mf.slope;
            worst_se = mf.slope_se;
        }
    }

    const double hi = main.factor + z95_one_sided * main.se;
    out.checks.push_back(make_check("factor", main.factor, main.se, main.factor - z95 * main.se, hi,
                                    "one-sided 95% upper bound < 1", hi < 1.0, samples));
    out.checks.push_back(make_check("divergent_estimate", main.divergent ? 1 : 0, 0, 0, 0,
                                    "== 0 (interval within a factor 10)", !main.divergent, samples));
    out.checks.push_back(make_check("factor_monotone_in_T", monotone ? 1 : 0, 0, 0, 0, "increasing over the T sweep",
                                    monotone, samples));
    out.checks.push_back(make_check("modulus_exponent", worst, worst_se, worst - z95 * worst_se,
                                    worst + z95 * worst_se, "smallest exponent over s >= 0.45", worst >= 0.45, samples));
    return out;
}

} // namespace

Outcome run_contraction(const json& cfg, const Context& ctx)
{
    return dimension_of(cfg) == 2 ? contraction<2>(cfg, ctx) : contraction<3>(cfg, ctx);
}

} // namespace hsgas::exp
