#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hsgas::exp {

/// Bad configuration; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One checked quantity with its acceptance rule.
struct Check {
    std::string name;
    double value = 0.0;
    double se = 0.0;
    double lo = 0.0, hi = 0.0; ///< confidence interval, or the value twice when exact
    std::string target;        ///< rule in words, e.g. "slope in [0.85, 1.15]"
    bool pass = false;
    std::size_t samples = 0;
};

struct Context {
    std::filesystem::path out;      ///< empty: write nothing
    std::uint64_t seed = 1;
    unsigned shards = 1;            ///< worker threads; results do not depend on it
    bool quiet = true;
};

struct Outcome {
    std::string kind;
    std::vector<Check> checks;
    std::vector<std::string> files;    ///< data files written, relative to Context::out
    std::vector<std::string> warnings;

    bool all_pass() const
    {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Runs the experiment selected by cfg["kind"], writes data files, checks.csv and manifest.json.
Outcome run_experiment(const nlohmann::json& cfg, const Context& ctx);

/// Renders the plain-text summary of an artifact directory; returns false when a check failed or files are missing.
bool emit_report(const std::filesystem::path& dir, std::string& text);

// Individual experiments, also used by the acceptance driver. Each reads its own block cfg[kind].
Outcome run_simulate(const nlohmann::json& cfg, const Context& ctx);
Outcome run_marginals(const nlohmann::json& cfg, const Context& ctx);
Outcome run_duhamel(const nlohmann::json& cfg, const Context& ctx);
Outcome run_badset(const nlohmann::json& cfg, const Context& ctx);
Outcome run_grazing(const nlohmann::json& cfg, const Context& ctx);
Outcome run_shooting(const nlohmann::json& cfg, const Context& ctx);
Outcome run_pathology(const nlohmann::json& cfg, const Context& ctx);
Outcome run_contraction(const nlohmann::json& cfg, const Context& ctx);
Outcome run_converge(const nlohmann::json& cfg, const Context& ctx);

/// Code version string baked in at build time.
const char* code_version();

} // namespace hsgas::exp
