#include "common.hpp"

#include <cstdio>
#include <iostream>

#include "hsgas/rng.hpp"

namespace hsgas::exp {

int dimension_of(const json& cfg)
{
    const int d = get_or(cfg, "d", 2);
    if (d != 2 && d != 3) throw ConfigError("config: d must be 2 or 3");
    return d;
}

CutoffParams cutoffs_of(const json& cfg)
{
    const json& b = block_of(cfg, "cuts");
    CutoffParams c;
    c.n = get_or(b, "n", c.n);
    c.R = get_or(b, "R", c.R);
    c.delta = get_or(b, "delta", c.delta);
    c.a = get_or(b, "a", c.a);
    c.eps0 = get_or(b, "eps0", c.eps0);
    c.rho = get_or(b, "rho", c.rho);
    c.eta = get_or(b, "eta", c.eta);
    c.alpha = get_or(b, "alpha", c.alpha);
    c.gamma = get_or(b, "gamma", c.gamma);
    c.eps = get_or(b, "eps", c.eps);
    c.c_d = get_or(b, "c_d", c.c_d);
    return c;
}

CutoffParams truncation_of(const json& cfg)
{
    CutoffParams c = cutoffs_of(cfg);
    const json& b = block_of(cfg, "truncation");
    c.n = get_or(b, "n", c.n);
    c.R = get_or(b, "R", c.R);
    c.delta = get_or(b, "delta", c.delta);
    if (c.n < 0 || !(c.R > 0.0) || !(c.delta >= 0.0)) throw ConfigError("truncation: need n >= 0, R > 0, δ >= 0");
    return c;
}

void require_compatible(const CutoffParams& c)
{
    const auto v = c.violations();
    if (v.empty()) return;
    std::string msg = "cut-off parameters violate";
    for (const auto& s : v) msg += " [" + s + "]";
    throw ConfigError(msg);
}

NormWeights weights_of(const json& cfg)
{
    const json& b = block_of(cfg, "norms");
    NormWeights w;
    w.beta0 = get_or(b, "beta0", 1.0);
    w.mu0 = get_or(b, "mu0", 0.0);
    w.lambda = get_or(b, "lambda", 100.0);
    w.T = get_or(b, "T", 0.0025);
    try {
        w.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return w;
}

double t_prime_ratio_of(const json& cfg)
{
    const double r = get_or(block_of(cfg, "norms"), "t_prime_ratio", 0.5);
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("config: norms.t_prime_ratio must lie in (0, 1)");
    return r;
}

std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Csv::Csv(const Context& ctx, Outcome& out, const std::string& name, const std::vector<std::string>& header)
{
    if (ctx.out.empty()) return;
    std::filesystem::create_directories(ctx.out);
    f_.open(ctx.out / name, std::ios::binary | std::ios::trunc);
    if (!f_) throw std::runtime_error("cannot write " + (ctx.out / name).string());
    on_ = true;
    out.files.push_back(name);
    for (const auto& h : header) *this << h;
    end_row();
}

void Csv::sep()
{
    if (!first_) f_ << ',';
    first_ = false;
}

Csv& Csv::operator<<(double x)
{
    if (on_) {
        sep();
        f_ << fmt17(x);
    }
    return *this;
}

Csv& Csv::operator<<(long long x)
{
    if (on_) {
        sep();
        f_ << x;
    }
    return *this;
}

Csv& Csv::operator<<(const std::string& s)
{
    if (on_) {
        sep();
        f_ << s;
    }
    return *this;
}

void Csv::end_row()
{
    if (on_) f_ << '\n';
    first_ = true;
}

Check make_check(std::string name, double value, double se, double lo, double hi, std::string target, bool pass,
                 std::size_t samples)
{
    return Check{std::move(name), value, se, lo, hi, std::move(target), pass, samples};
}

std::vector<std::uint64_t> shard_seeds(std::uint64_t master, unsigned shards)
{
    std::vector<std::uint64_t> s;
    for (unsigned i = 0; i < std::max(1u, shards); ++i) s.push_back(derive_seed(master, {0x5a4d00ULL, i}));
    return s;
}

void log_line(const Context& ctx, const std::string& s)
{
    if (!ctx.quiet) std::cerr << s << '\n';
}

} // namespace hsgas::exp

namespace hsgas::exp {

double grad_eps(const json& block, long long N, int d)
{
    if (N < 1) throw ConfigError("config: N must be >= 1");
    const double e_grad = std::pow(double(N), -1.0 / double(d - 1));
    if (!block.contains("eps")) return e_grad;
    const double e = get_or(block, "eps", e_grad);
    if (!(e >= 0.0)) throw ConfigError("config: eps must be >= 0");
    const double ne = double(N) * std::pow(e, d - 1);
    if (std::abs(ne - 1.0) > 1e-9 && get_or(block, "boltzmann_grad", true))
        throw ConfigError("config: N eps^{d-1} = " + fmt17(ne) +
                          " differs from 1; set \"boltzmann_grad\": false to run off the Boltzmann-Grad scaling");
    return e;
}

double mean_free_time(long long N, double eps, int d, double beta0)
{
    const double rel = d == 2 ? std::sqrt(M_PI / beta0) : 4.0 / std::sqrt(M_PI * beta0);
    return 1.0 / (double(N) * std::pow(eps, d - 1) * rel);
}

std::vector<double> list_or(const json& block, const char* key, std::vector<double> fallback)
{
    auto v = get_or(block, key, fallback);
    if (v.empty()) throw ConfigError(std::string("config: '") + key + "' must not be empty");
    return v;
}

} // namespace hsgas::exp
