#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hsgas/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("hsgas_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const json& cfg)
{
    const fs::path p = dir / "config.json";
    std::ofstream(p) << cfg.dump(2);
    return p;
}

int cli(const std::string& args, const fs::path& err = "/dev/null")
{
    const std::string cmd = std::string(HSGAS_CLI) + " " + args + " >/dev/null 2>" + err.string();
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json small_simulate()
{
    return {{"kind", "simulate"}, {"d", 2}, {"seed", 4}, {"simulate", {{"N", 4}, {"t_mft", 1.0}, {"replicas", 6}}}};
}

} // namespace

TEST(Cli, IncompatibleCutsNameTheInequality)
{
    const auto dir = scratch("cuts");
    json cfg = small_simulate();
    cfg["cuts"] = {{"eps0", 0.1}};
    const int code = cli("--config " + write_config(dir, cfg).string() + " --out " + (dir / "out").string(), dir / "err");
    EXPECT_EQ(code, 2);
    EXPECT_NE(slurp(dir / "err").find("ε₀ ≤ ηδ"), std::string::npos) << slurp(dir / "err");
}

TEST(Cli, ConfigErrors)
{
    const auto dir = scratch("cfg");
    EXPECT_EQ(cli("--config " + (dir / "missing.json").string()), 2);
    std::ofstream(dir / "bad.json") << "{ not json";
    EXPECT_EQ(cli("--config " + (dir / "bad.json").string()), 2);
    EXPECT_EQ(cli("--config " + write_config(dir, {{"kind", "nope"}}).string()), 2);
    EXPECT_EQ(cli("--bogus-flag"), 2);
    EXPECT_EQ(cli(""), 2);
}

TEST(Cli, SameSeedSameArtifacts)
{
    const auto dir = scratch("det");
    const auto cfg = write_config(dir, small_simulate()).string();
    ASSERT_EQ(cli("--quiet --config " + cfg + " --out " + (dir / "a").string()), 0);
    ASSERT_EQ(cli("--quiet --config " + cfg + " --shards 2 --out " + (dir / "b").string()), 0);
    ASSERT_EQ(cli("--quiet --config " + cfg + " --seed 99 --out " + (dir / "c").string()), 0);
    const json a = json::parse(slurp(dir / "a" / "manifest.json"));
    const json b = json::parse(slurp(dir / "b" / "manifest.json"));
    const json c = json::parse(slurp(dir / "c" / "manifest.json"));
    EXPECT_EQ(a["files"], b["files"]);
    EXPECT_EQ(slurp(dir / "a" / "checks.csv"), slurp(dir / "b" / "checks.csv"));
    EXPECT_NE(a["files"]["states.csv"], c["files"]["states.csv"]);
    EXPECT_EQ(c["master_seed"], 99);
    EXPECT_FALSE(a["files"].empty());
}

TEST(Cli, Report)
{
    const auto dir = scratch("report");
    EXPECT_EQ(cli("--report " + (dir / "empty").string()), 4);
    fs::create_directories(dir / "empty");
    EXPECT_EQ(cli("--report " + (dir / "empty").string()), 4);
    const auto cfg = write_config(dir, small_simulate()).string();
    ASSERT_EQ(cli("--quiet --config " + cfg + " --out " + (dir / "run").string()), 0);
    EXPECT_EQ(cli("--report " + (dir / "run").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "run" / "report.txt"));
    EXPECT_TRUE(fs::exists(dir / "run" / "summary.csv"));
    fs::remove(dir / "run" / "states.csv");
    EXPECT_EQ(cli("--report " + (dir / "run").string()), 4);
}

TEST(Harness, InMemoryRunWritesNothing)
{
    hsgas::exp::Context ctx;
    const auto out = hsgas::exp::run_experiment(small_simulate(), ctx);
    EXPECT_EQ(out.kind, "simulate");
    EXPECT_FALSE(out.checks.empty());
    EXPECT_TRUE(out.all_pass());
}

TEST(Harness, RejectsUnknownStudy)
{
    hsgas::exp::Context ctx;
    const json cfg = {{"kind", "duhamel"}, {"d", 2}, {"duhamel", {{"study", "nope"}}}};
    EXPECT_THROW(hsgas::exp::run_experiment(cfg, ctx), hsgas::exp::ConfigError);
}

TEST(Harness, BadDimension)
{
    hsgas::exp::Context ctx;
    json cfg = small_simulate();
    cfg["d"] = 4;
    EXPECT_THROW(hsgas::exp::run_experiment(cfg, ctx), hsgas::exp::ConfigError);
}
