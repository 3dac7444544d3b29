#include <algorithm>

#include "common.hpp"
#include "hsgas/duhamel.hpp"

namespace hsgas::exp {

namespace {

struct Sum {
    double value = 0.0, se = 0.0;
};

template <std::size_t D>
Sum collision_terms(const Configuration<D>& Z, double t, const InitialData<D>& f0, const CutoffParams& c,
                    const SamplerOptions& o, bool abs_kernel, std::vector<TermEstimate>* keep = nullptr)
{
    Sum s;
    double var = 0.0;
    for (int k = 1; k <= c.n; ++k) {
        const TermEstimate te = estimate_term(Z, k, t, f0, c, DuhamelMode::boltzmann, o);
        s.value += abs_kernel ? te.abs_value : te.value;
        const double e = abs_kernel ? te.abs_se : te.se;
        var += e * e;
        if (keep) keep->push_back(te);
    }
    s.se = std::sqrt(var);
    return s;
}

template <std::size_t D>
Configuration<D> point_of(const json& b, const char* kx, const char* kv)
{
    Vec<D> x{}, v{};
    x[0] = 1.0;
    v[0] = 0.5;
    v[1] = 0.3;
    auto read = [&](const char* key, Vec<D>& out) {
        if (!b.contains(key)) return;
        const auto a = get_or<std::vector<double>>(b, key, {});
        if (a.size() != D) throw ConfigError(std::string("duhamel: '") + key + "' must have d components");
        std::copy(a.begin(), a.end(), out.begin());
    };
    read(kx, x);
    read(kv, v);
    Configuration<D> Z;
    Z.p.push_back({x, v});
    if (!phase_space_contains(Z)) throw ConfigError("duhamel: point outside the half-space");
    return Z;
}

template <std::size_t D>
Outcome duhamel(const json& cfg, const Context& ctx)
{
    const json& b = block_of(cfg, "duhamel");
    const std::string study = get_or(b, "study", std::string("terms"));
    CutoffParams c = study == "hybrid" ? cutoffs_of(cfg) : truncation_of(cfg);
    const auto f0 = data_of<D>(cfg);
    const auto w = weights_of(cfg);
    const double tprime = t_prime_ratio_of(cfg) * w.T;
    const double t = b.contains("t") ? get_or(b, "t", 0.0) : get_or(b, "t_over_tprime", 0.5) * tprime;
    if (!(t > 0.0)) throw ConfigError("duhamel: t must be > 0");
    SamplerOptions o;
    o.samples = get_or(b, "samples", std::size_t(200'000));
    o.replicas = get_or(b, "replicas", std::size_t(20));
    o.sample_radius = get_or(b, "sample_radius", 0.0);
    o.seed = ctx.seed;
    o.threads = ctx.shards;
    const std::string sm = get_or(b, "simplex", std::string(study == "separation" ? "indicator" : "separated"));
    if (sm != "separated" && sm != "indicator") throw ConfigError("duhamel: simplex must be separated or indicator");
    o.simplex = sm == "indicator" ? SimplexMode::indicator : SimplexMode::separated;
    const Configuration<D> Z = point_of<D>(b, "x", "v");

    Outcome out;
    Csv tc(ctx, out, "terms.csv",
           {"study", "parameter", "k", "value", "se", "abs_value", "abs_se", "samples", "invalid", "excluded"});
    auto emit_terms = [&](double param, const std::vector<TermEstimate>& ts) {
        for (const auto& te : ts) {
            tc << study << param << te.k << te.value << te.se << te.abs_value << te.abs_se << te.samples << te.invalid
               << te.excluded;
            tc.end_row();
        }
    };

    if (study == "terms" || study == "truncation") {
        std::vector<TermEstimate> ts{estimate_term(Z, 0, t, f0, c, DuhamelMode::boltzmann, o)};
        collision_terms(Z, t, f0, c, o, true, &ts);
        emit_terms(t, ts);
        double total = 0.0, var = 0.0;
        for (const auto& te : ts) {
            total += te.value;
            var += te.se * te.se;
        }
        out.checks.push_back(make_check("truncated_series", total, std::sqrt(var), total - z95 * std::sqrt(var),
                                        total + z95 * std::sqrt(var), "informational", true, o.samples));
        if (study == "truncation") {
            const double limit = get_or(b, "ratio_limit", 0.75);
            if (t > 0.5 * tprime * (1 + 1e-12))
                out.warnings.push_back("truncation study run at t > T'/2");
            Csv rc(ctx, out, "ratios.csv", {"k", "ratio", "se", "upper95"});
            double worst = 0.0, worst_se = 0.0, worst_up = 0.0;
            for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
                const double a = ts[k].abs_value, bb = ts[k + 1].abs_value;
                if (!(a > 0.0)) throw std::runtime_error("duhamel: vanishing term, ratio undefined");
                const double r = bb / a;
                const double rse = r * std::sqrt(std::pow(ts[k].abs_se / a, 2) + std::pow(ts[k + 1].abs_se / std::max(bb, 1e-300), 2));
                const double up = r + z95_one_sided * rse;
                rc << int(k) << r << rse << up;
                rc.end_row();
                if (up >= worst_up) {
                    worst_up = up;
                    worst = r;
                    worst_se = rse;
                }
            }
            out.checks.push_back(make_check("max_consecutive_ratio", worst, worst_se, worst - z95 * worst_se, worst_up,
                                            "one-sided 95% upper bound <= " + fmt17(limit), worst_up <= limit,
                                            o.samples * ts.size()));
        }
    } else if (study == "energy") {
        const auto Rs = list_or(b, "R_list", {1.5, 2.0, 2.5, 3.0, 3.5, 4.0});
        const double Rref = get_or(b, "R_ref", 8.0);
        if (!(o.sample_radius > 0.0)) o.sample_radius = Rref;
        for (double R : Rs)
            if (!(R < Rref) || R > o.sample_radius) throw ConfigError("duhamel: need R < R_ref <= sample_radius");
        c.R = Rref;
        std::vector<TermEstimate> ref_terms;
        const Sum ref = collision_terms(Z, t, f0, c, o, true, &ref_terms);
        emit_terms(Rref, ref_terms);
        Csv ec(ctx, out, "energy.csv", {"R", "estimate", "se", "remainder", "remainder_se"});
        std::vector<double> x, y;
        for (double R : Rs) {
            c.R = R;
            std::vector<TermEstimate> ts;
            const Sum s = collision_terms(Z, t, f0, c, o, true, &ts);
            emit_terms(R, ts);
            // the truncated estimate is a sub-sum of the reference on shared draws
            const double rem = ref.value - s.value;
            ec << R << s.value << s.se << rem << std::sqrt(std::abs(ref.se * ref.se - s.se * s.se));
            ec.end_row();
            if (!(rem > 0.0)) throw std::runtime_error("duhamel: non-positive energy remainder at R = " + fmt17(R));
            x.push_back(R * R);
            y.push_back(std::log(rem));
        }
        const LinearFit f = linear_fit(x, y);
        out.checks.push_back(make_check("log_remainder_slope", f.slope, f.slope_se, f.slope - z95 * f.slope_se,
                                        f.slope + z95 * f.slope_se, "slope < 0", f.slope < 0.0, o.samples));
        out.checks.push_back(make_check("log_remainder_r2", f.r2, 0, f.r2, f.r2, "r2 >= 0.9", f.r2 >= 0.9, o.samples));
    } else if (study == "separation") {
        const auto ds = list_or(b, "delta_list", {t / 32, t / 16, t / 8, t / 4});
        Csv sc(ctx, out, "separation.csv", {"delta", "estimate", "estimate_half", "remainder", "se"});
        std::vector<double> x, y;
        for (double d : ds) {
            if (!(d > 0.0) || d * (c.n - 1) > t) throw ConfigError("duhamel: need 0 < δ (n-1) <= t");
            c.delta = d;
            std::vector<TermEstimate> ts;
            const Sum s1 = collision_terms(Z, t, f0, c, o, true, &ts);
            emit_terms(d, ts);
            c.delta = d / 2;
            const Sum s2 = collision_terms(Z, t, f0, c, o, true);
            const double rem = s2.value - s1.value; // smaller gap keeps a superset of the draws
            sc << d << s1.value << s2.value << rem << std::sqrt(std::abs(s2.se * s2.se - s1.se * s1.se));
            sc.end_row();
            if (!(rem > 0.0)) throw std::runtime_error("duhamel: non-positive separation remainder at δ = " + fmt17(d));
            x.push_back(d);
            y.push_back(rem);
        }
        const LinearFit f = loglog_fit(x, y);
        out.checks.push_back(make_check("delta_exponent", f.slope, f.slope_se, f.slope - z95 * f.slope_se,
                                        f.slope + z95 * f.slope_se, "exponent >= 0.4", f.slope >= 0.4, o.samples));
    } else if (study == "hybrid") {
        require_compatible(c);
        std::vector<Configuration<D>> grid;
        if (b.contains("points")) {
            for (const auto& p : b.at("points")) grid.push_back(point_of<D>(p, "x", "v"));
        } else {
            grid.push_back(Z);
        }
        HybridComparison hc;
        try {
            hc = compare_boltzmann_hybrid(grid, t, f0, c, o);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        Csv hcsv(ctx, out, "hybrid.csv", {"point", "difference", "se"});
        for (std::size_t p = 0; p < grid.size(); ++p) {
            hcsv << p << hc.diff[p] << hc.se[p];
            hcsv.end_row();
        }
        out.checks.push_back(make_check("sup_difference", hc.sup_diff, hc.se_at_sup, hc.sup_diff - z95 * hc.se_at_sup,
                                        hc.sup_diff + z95 * hc.se_at_sup, "informational", true, o.samples));
        out.checks.push_back(make_check("invalid_adjunctions", double(hc.invalid), 0, 0, 0, "informational", true,
                                        o.samples));
    } else {
        throw ConfigError("duhamel: unknown study '" + study + "'");
    }
    return out;
}

} // namespace

Outcome run_duhamel(const json& cfg, const Context& ctx)
{
    return dimension_of(cfg) == 2 ? duhamel<2>(cfg, ctx) : duhamel<3>(cfg, ctx);
}

} // namespace hsgas::exp
