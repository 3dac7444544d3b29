// Acceptance driver: one PASS/FAIL line per criterion. Thresholds and runtime budgets live here, not in the configs.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <nlohmann/json.hpp>

#include "hsgas/experiments.hpp"
#include "hsgas/geometry.hpp"
#include "hsgas/norms.hpp"
#include "hsgas/rng.hpp"

using namespace hsgas;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string num(double x)
{
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", x);
    return b;
}

json load(const std::string& name)
{
    std::ifstream f(std::string(HSGAS_CONFIG_DIR) + "/" + name + ".json");
    if (!f) throw std::runtime_error("missing config " + name);
    return json::parse(f);
}

std::map<std::string, exp::Check> run(const std::string& name)
{
    exp::Context ctx;
    const auto out = exp::run_experiment(load(name), ctx);
    std::map<std::string, exp::Check> m;
    for (const auto& c : out.checks) m[c.name] = c;
    return m;
}

const exp::Check& get(const std::map<std::string, exp::Check>& m, const std::string& k)
{
    const auto it = m.find(k);
    if (it == m.end()) throw std::runtime_error("check '" + k + "' not reported");
    return it->second;
}

// exact a + b - c for c close to a + b
double gap(double a, double b, double c)
{
    const double s = a + b, bb = s - a, e = (a - (s - bb)) + (b - bb);
    return (s - c) + e;
}

// 2r ∫ du / sqrt(r^2 - (u - p)^2) over the slab; endpoint distances come from the complement argument
double arc_by_quadrature(double p, double r, double alpha)
{
    static boost::math::quadrature::tanh_sinh<double> ts;
    // a positive gap means the slab cuts the circle on that side
    const double glo = std::max(0.0, gap(-p, r, alpha)), ghi = std::max(0.0, gap(p, r, alpha));
    const double lo = glo > 0 ? -alpha : p - r, hi = ghi > 0 ? alpha : p + r;
    if (!(hi > lo)) return 0.0;
    return ts.integrate(
        [&](double u, double uc) {
            const double dl = uc < 0 ? glo - uc : r + (u - p);
            const double dh = uc > 0 ? ghi + uc : r - (u - p);
            return 2.0 * r / std::sqrt(dl * dh);
        },
        lo, hi, 1e-14);
}

template <std::size_t D>
Vec<D> gauss(Rng& g)
{
    std::normal_distribution<double> n;
    Vec<D> v;
    for (auto& c : v) c = n(g);
    return v;
}

template <std::size_t D>
void scattering_suite(Rng& g, int events, int jac, double& cons, double& inv, double& det)
{
    for (int n = 0; n < events; ++n) {
        const Vec<D> v = gauss<D>(g), vs = gauss<D>(g), w = sample_unit_sphere<D>(g);
        auto [a, b] = scattering_map(v, vs, w);
        const double e = norm2(v) + norm2(vs);
        cons = std::max(cons, std::abs(norm2(a) + norm2(b) - e) / e);
        cons = std::max(cons, norm((a + b) - (v + vs)) / std::sqrt(e));
        auto [a2, b2] = scattering_map(a, b, w);
        inv = std::max(inv, (norm(a2 - v) + norm(b2 - vs)) / std::sqrt(e));
        if (n < jac) det = std::max(det, std::abs(std::abs(scattering_jacobian_det(v, vs, w)) - 1.0));
    }
}

Verdict c1()
{
    Rng g(derive_seed(1, {1}));
    double cons = 0, inv = 0, det = 0;
    scattering_suite<2>(g, 100000, 1000, cons, inv, det);
    scattering_suite<3>(g, 100000, 1000, cons, inv, det);
    return {cons <= 1e-12 && inv <= 1e-12 && det <= 1e-6,
            "conservation " + num(cons) + ", involution " + num(inv) + ", max ||det|-1| " + num(det)};
}

Verdict c2()
{
    const auto m = run("simulate");
    const auto& f = get(m, "reversal_pass_fraction");
    const bool ok = f.samples >= 100 && f.value >= 0.99 && get(m, "energy_relative_error").pass;
    return {ok, "reversed fraction " + num(f.value) + " of " + std::to_string(f.samples) + ", worst error " +
                    num(get(m, "reversal_worst_error").value)};
}

Verdict c3()
{
    double worst = 0;
    int cases = 0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j)
            for (int k = 0; k < 20; ++k) {
                const double p = -2.0 + 4.0 * (i + 0.5) / 20, r = 0.1 + 1.9 * j / 19.0, alpha = 0.01 + 1.99 * k / 19.0;
                const double ref = arc_by_quadrature(p, r, alpha);
                worst = std::max(worst, std::abs(sphere_slab_arc_2d(p, r, alpha) - ref));
                ++cases;
            }
    return {worst <= 1e-8, std::to_string(cases) + " cases, max abs error " + num(worst)};
}

Verdict c4()
{
    const auto m = run("grazing");
    const auto& s = get(m, "slope_d3");
    const auto& b = get(m, "bound_ratio_d2");
    const bool ok = std::abs(s.value - 1.0) <= 0.15 && b.pass && s.samples >= 9'000'000;
    return {ok, "d=3 slope " + num(s.value) + " +- " + num(s.se) + ", d=2 max measure/bound " + num(b.value)};
}

Verdict c5()
{
    const auto m = run("badset");
    const auto& e = get(m, "exponent");
    const bool ok = e.value >= 0.3 && get(m, "monotone_in_a").value == 1 && get(m, "outside_superset").value == 0;
    return {ok, "exponent " + num(e.value) + " +- " + num(e.se) + ", monotone " + num(get(m, "monotone_in_a").value)};
}

Verdict c6()
{
    const auto m = run("shooting");
    const auto& r = get(m, "trees_with_recollision");
    const bool ok = r.samples >= 10000 && r.value == 0 && get(m, "divergence_violations").value == 0 &&
                    get(m, "build_failures").value == 0;
    return {ok, std::to_string(r.samples) + " trees, recollisions " + num(r.value) + ", violations " +
                    num(get(m, "divergence_violations").value) + ", worst |x_eps - x_0| / 2k eps " +
                    num(get(m, "worst_divergence_ratio").value)};
}

Verdict c7()
{
    const auto m = run("duhamel_truncation");
    const auto& r = get(m, "max_consecutive_ratio");
    return {r.hi <= 0.75, "max ratio " + num(r.value) + ", 95% upper " + num(r.hi)};
}

Verdict c8()
{
    const auto m = run("duhamel_energy");
    const auto& s = get(m, "log_remainder_slope");
    const auto& r2 = get(m, "log_remainder_r2");
    return {s.value < 0 && r2.value >= 0.9, "slope " + num(s.value) + " +- " + num(s.se) + ", r2 " + num(r2.value)};
}

Verdict c9()
{
    const auto m = run("duhamel_separation");
    const auto& e = get(m, "delta_exponent");
    return {e.value >= 0.4, "exponent " + num(e.value) + " +- " + num(e.se)};
}

Verdict c10()
{
    const auto m = run("marginals");
    bool ok = true;
    std::string d;
    for (const char* s : {"s1", "s2"}) {
        const auto& sl = get(m, std::string("admissible_slope_") + s);
        const auto& r2 = get(m, std::string("admissible_r2_") + s);
        ok &= sl.value >= 0.7 && sl.value <= 1.3 && r2.value >= 0.95;
        d += std::string(s) + ": slope " + num(sl.value) + " r2 " + num(r2.value) + "; ";
    }
    return {ok, d};
}

Verdict c11()
{
    const auto m = run("converge");
    const auto& dec = get(m, "distance_strictly_decreasing");
    const auto& fin = get(m, "final_distance_over_se");
    return {dec.value == 1 && fin.value <= 3.0,
            "decreasing " + num(dec.value) + ", final distance " + num(fin.lo) + " = " + num(fin.value) +
                " x combined se"};
}

template <std::size_t D>
double cartesian_integral(const std::vector<Vec<D>>& V, std::size_t i, double beta)
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double L = 14.0 / std::sqrt(beta);
    auto q = [](const std::function<double(double)>& f, double a, double b) { return GK::integrate(f, a, b, 15, 1e-13); };
    double e = 0.0;
    for (const auto& v : V) e += norm2(v);
    const double vi = norm(V[i]);
    // integrand is even in each coordinate of the new velocity
    std::function<double(const Vec<D>&)> f = [&](const Vec<D>& w) {
        return (vi + norm(w)) * std::exp(-0.5 * beta * norm2(w));
    };
    double inner;
    if constexpr (D == 2) {
        inner = q([&](double y) { return q([&](double x) { return f(Vec<D>{x, y}); }, 0, L); }, 0, L);
    } else {
        inner = q([&](double z) {
            return q([&](double y) { return q([&](double x) { return f(Vec<D>{x, y, z}); }, 0, L); }, 0, L);
        }, 0, L);
    }
    return std::exp(-0.5 * beta * e) * std::pow(2.0, double(D)) * inner;
}

Verdict c12()
{
    const auto m = run("contraction");
    const auto& f = get(m, "factor");
    double worst = 0.0;
    Rng g(derive_seed(1, {12}));
    for (int n = 0; n < 3; ++n) {
        const double beta = 0.5 + uniform01(g);
        std::vector<Vec<2>> V2{gauss<2>(g), gauss<2>(g)};
        const double a = collision_velocity_integral(V2, 0, beta), b = cartesian_integral<2>(V2, 0, beta);
        worst = std::max(worst, std::abs(a - b) / b);
    }
    {
        std::vector<Vec<3>> V3{gauss<3>(g)};
        const double a = collision_velocity_integral(V3, 0, 0.9), b = cartesian_integral<3>(V3, 0, 0.9);
        worst = std::max(worst, std::abs(a - b) / b);
    }
    return {f.hi < 1.0 && worst <= 1e-8,
            "factor " + num(f.value) + " (95% upper " + num(f.hi) + "), closed form vs quadrature rel error " + num(worst)};
}

Verdict c13()
{
    const auto m = run("pathology");
    const bool ok = get(m, "fraction_monotone").value == 1 && get(m, "fraction_at_largest_tol").value > 0 &&
                    get(m, "fraction_at_smallest_tol").value == 0 && get(m, "decades_spanned").value >= 3;
    return {ok, "fraction " + num(get(m, "fraction_at_largest_tol").value) + " -> " +
                    num(get(m, "fraction_at_smallest_tol").value) + " over " + num(get(m, "decades_spanned").value) +
                    " decades"};
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        double budget_s;
        Verdict (*fn)();
    };
    const Criterion all[] = {
        {"scattering_conservation_involution", 60, c1},
        {"reversibility", 120, c2},
        {"sphere_slab_formula", 60, c3},
        {"grazing_measure_scaling", 600, c4},
        {"bad_set_scaling", 900, c5},
        {"pseudo_trajectory_control", 300, c6},
        {"truncation_decay", 600, c7},
        {"energy_cutoff", 600, c8},
        {"time_separation_cutoff", 600, c9},
        {"admissible_data", 300, c10},
        {"desk_scale_convergence", 1800, c11},
        {"contraction", 300, c12},
        {"pathology_probe", 300, c13},
    };
    int failed = 0, id = 0;
    for (const auto& c : all) {
        ++id;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.fn();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = s <= c.budget_s;
        const bool pass = v.pass && in_time;
        failed += !pass;
        std::printf("%s %2d %s: %s [%.1f s of %.0f s]\n", pass ? "PASS" : "FAIL", id, c.name, v.detail.c_str(), s,
                    c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", id - failed, id);
    return failed ? 1 : 0;
}
