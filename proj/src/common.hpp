#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsgas/cutoffs.hpp"
#include "hsgas/experiments.hpp"
#include "hsgas/initial_data.hpp"
#include "hsgas/norms.hpp"
#include "hsgas/vec.hpp"

namespace hsgas::exp {

using json = nlohmann::json;

/// Value of key in block, or fallback when absent; type errors become ConfigError.
template <class T>
T get_or(const json& block, const char* key, T fallback)
{
    if (!block.is_object() || !block.contains(key)) return fallback;
    try {
        return block.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

inline const json& block_of(const json& cfg, const char* key)
{
    static const json empty = json::object();
    if (!cfg.contains(key)) return empty;
    if (!cfg.at(key).is_object()) throw ConfigError(std::string("config: '") + key + "' must be an object");
    return cfg.at(key);
}

int dimension_of(const json& cfg);
CutoffParams cutoffs_of(const json& cfg);
NormWeights weights_of(const json& cfg);
/// Cut-offs with n, R, delta overridden by the "truncation" block; the geometric thresholds are left unchecked.
CutoffParams truncation_of(const json& cfg);
double t_prime_ratio_of(const json& cfg);

/// Throws ConfigError naming every violated compatibility constraint.
void require_compatible(const CutoffParams& c);

template <std::size_t D>
InitialData<D> data_of(const json& cfg)
{
    const json& b = block_of(cfg, "data");
    InitialData<D> f;
    f.x0 = Vec<D>{};
    f.x0[0] = 1.0;
    if (b.contains("x0")) {
        const auto v = get_or<std::vector<double>>(b, "x0", {});
        if (v.size() != D) throw ConfigError("config: data.x0 must have d components");
        for (std::size_t i = 0; i < D; ++i) f.x0[i] = v[i];
    }
    f.sigma = get_or(b, "sigma", 0.5);
    f.beta0 = get_or(b, "beta0", 1.0);
    f.homogeneous = get_or(b, "homogeneous", false);
    try {
        f.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return f;
}

/// Comma-separated table with a header row; numbers printed with %.17g.
class Csv {
public:
    Csv(const Context& ctx, Outcome& out, const std::string& name, const std::vector<std::string>& header);
    Csv& operator<<(double x);
    Csv& operator<<(long long x);
    Csv& operator<<(std::size_t x) { return *this << static_cast<long long>(x); }
    Csv& operator<<(int x) { return *this << static_cast<long long>(x); }
    Csv& operator<<(const std::string& s);
    Csv& operator<<(const char* s) { return *this << std::string(s); }
    void end_row();

private:
    void sep();
    std::ofstream f_;
    bool on_ = false;
    bool first_ = true;
};

std::string fmt17(double x);

Check make_check(std::string name, double value, double se, double lo, double hi, std::string target, bool pass,
                 std::size_t samples);

/// Seeds handed to each shard, recorded in the manifest for reference.
std::vector<std::uint64_t> shard_seeds(std::uint64_t master, unsigned shards);

void log_line(const Context& ctx, const std::string& s);

} // namespace hsgas::exp

namespace hsgas::exp {

/// Diameter from the block, defaulting to the Boltzmann-Grad value N eps^{d-1} = 1; a deviating eps needs
/// "boltzmann_grad": false in the same block.
double grad_eps(const json& block, long long N, int d);

/// Mean time between collisions of one particle at unit density for Maxwellian velocities.
double mean_free_time(long long N, double eps, int d, double beta0);

std::vector<double> list_or(const json& block, const char* key, std::vector<double> fallback);

} // namespace hsgas::exp
