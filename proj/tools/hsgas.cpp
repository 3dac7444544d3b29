#include <cstdint>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hsgas/experiments.hpp"

namespace {

enum Exit { ok = 0, config_error = 2, runtime_error = 3, check_failure = 4 };

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hard-sphere gas in a half-space: simulation and verification experiments"};
    std::string config, out, report;
    std::uint64_t seed = 0;
    unsigned shards = 1;
    bool quiet = false;
    auto* cfg_opt = app.add_option("--config", config, "experiment configuration (JSON)");
    app.add_option("--out", out, "artifact directory");
    auto* seed_opt = app.add_option("--seed", seed, "master seed, overrides the config");
    app.add_option("--shards", shards, "worker threads; results do not depend on it")->check(CLI::Range(1u, 1024u));
    app.add_flag("--quiet", quiet, "suppress progress output");
    auto* rep_opt = app.add_option("--report", report, "render the summary of an artifact directory and exit");
    cfg_opt->excludes(rep_opt);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    if (!report.empty()) {
        std::string text;
        const bool pass = hsgas::exp::emit_report(report, text);
        std::cout << text;
        return pass ? ok : check_failure;
    }
    if (config.empty()) {
        std::cerr << "error: --config or --report is required\n";
        return config_error;
    }

    nlohmann::json cfg;
    try {
        std::ifstream f(config);
        if (!f) throw hsgas::exp::ConfigError("cannot open config " + config);
        f >> cfg;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const hsgas::exp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    }

    hsgas::exp::Context ctx;
    ctx.out = out;
    ctx.shards = shards;
    ctx.quiet = quiet;
    if (*seed_opt) cfg["seed"] = seed;
    try {
        const auto res = hsgas::exp::run_experiment(cfg, ctx);
        if (!quiet) {
            for (const auto& c : res.checks)
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value << " (" << c.target << ")\n";
            for (const auto& w : res.warnings) std::cout << "warning: " << w << '\n';
        }
    } catch (const hsgas::exp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return runtime_error;
    }
    return ok;
}
