#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "common.hpp"

#ifndef HSGAS_CODE_VERSION
#define HSGAS_CODE_VERSION "unknown"
#endif

namespace hsgas::exp {

const char* code_version() { return HSGAS_CODE_VERSION; }

namespace {

std::string fnv1a_file(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (f) {
        f.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < f.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[20];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

void write_checks(const Context& ctx, Outcome& out)
{
    Csv c(ctx, out, "checks.csv", {"name", "value", "se", "lo", "hi", "target", "pass", "samples"});
    for (const auto& k : out.checks) {
        c << k.name << k.value << k.se << k.lo << k.hi << ("\"" + k.target + "\"") << (k.pass ? "PASS" : "FAIL")
          << k.samples;
        c.end_row();
    }
}

using Runner = Outcome (*)(const json&, const Context&);

const std::map<std::string, Runner>& runners()
{
    static const std::map<std::string, Runner> m{
        {"simulate", run_simulate},       {"marginals", run_marginals}, {"duhamel", run_duhamel},
        {"badset", run_badset},           {"grazing", run_grazing},     {"shooting", run_shooting},
        {"pathology", run_pathology},     {"contraction", run_contraction}, {"converge", run_converge},
    };
    return m;
}

// Split a CSV line, honouring double quotes.
std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> f;
    std::string cur;
    bool q = false;
    for (char ch : line) {
        if (ch == '"') q = !q;
        else if (ch == ',' && !q) {
            f.push_back(cur);
            cur.clear();
        } else cur += ch;
    }
    f.push_back(cur);
    return f;
}

} // namespace

Outcome run_experiment(const json& cfg_in, const Context& ctx_in)
{
    if (!cfg_in.is_object()) throw ConfigError("config: top level must be an object");
    if (!cfg_in.contains("kind") || !cfg_in["kind"].is_string()) throw ConfigError("config: missing string 'kind'");
    const std::string kind = cfg_in["kind"].get<std::string>();
    const auto it = runners().find(kind);
    if (it == runners().end()) throw ConfigError("config: unknown kind '" + kind + "'");

    json cfg = cfg_in;
    Context ctx = ctx_in;
    if (!cfg.contains("seed")) cfg["seed"] = ctx.seed;
    ctx.seed = cfg["seed"].get<std::uint64_t>();
    if (cfg.contains("cuts")) require_compatible(cutoffs_of(cfg));

    const auto t0 = std::chrono::steady_clock::now();
    Outcome out = it->second(cfg, ctx);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.kind = kind;

    if (!ctx.out.empty()) {
        write_checks(ctx, out);
        json m;
        m["kind"] = kind;
        m["config"] = cfg;
        m["master_seed"] = ctx.seed;
        m["shards"] = ctx.shards;
        m["shard_seeds"] = shard_seeds(ctx.seed, ctx.shards);
        m["seed_derivation"] = "splitmix64 path hashing per replica; shard count does not enter any stream";
        m["wall_clock_seconds"] = wall;
        m["code_version"] = code_version();
        json files = json::object();
        for (const auto& f : out.files) files[f] = fnv1a_file(ctx.out / f);
        m["files"] = files;
        m["warnings"] = out.warnings;
        m["all_pass"] = out.all_pass();
        std::ofstream mf(ctx.out / "manifest.json", std::ios::trunc);
        mf << m.dump(2) << '\n';
        if (!mf) throw std::runtime_error("cannot write manifest.json");
    }
    return out;
}

bool emit_report(const std::filesystem::path& dir, std::string& text)
{
    std::ostringstream os;
    bool ok = true;
    std::vector<std::string> missing;
    json m;
    if (std::ifstream mf(dir / "manifest.json"); mf) {
        try {
            mf >> m;
        } catch (const json::exception&) {
            missing.push_back("manifest.json (unreadable)");
        }
    } else {
        missing.push_back("manifest.json");
    }
    if (m.is_object() && m.contains("files"))
        for (const auto& [f, digest] : m["files"].items())
            if (!std::filesystem::exists(dir / f)) missing.push_back(f);

    std::vector<std::vector<std::string>> rows;
    if (std::ifstream cf(dir / "checks.csv"); cf) {
        std::string line;
        std::getline(cf, line);
        while (std::getline(cf, line))
            if (!line.empty()) rows.push_back(split_csv(line));
    } else if (std::find(missing.begin(), missing.end(), "checks.csv") == missing.end()) {
        missing.push_back("checks.csv");
    }

    if (m.is_object())
        os << "kind " << m.value("kind", std::string("?")) << "  seed " << m.value("master_seed", 0ULL) << "  version "
           << m.value("code_version", std::string("?")) << "\n";
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-40s %14s %12s %27s  %-6s %s\n", "check", "estimate", "se", "interval", "result",
                  "target");
    os << buf;
    std::ofstream sf(dir / "summary.csv", std::ios::trunc);
    sf << "check,estimate,se,lo,hi,result,target\n";
    for (const auto& r : rows) {
        if (r.size() < 8) {
            ok = false;
            continue;
        }
        const double v = std::stod(r[1]), se = std::stod(r[2]), lo = std::stod(r[3]), hi = std::stod(r[4]);
        std::snprintf(buf, sizeof buf, "%-40s %14.6g %12.3g [%12.6g, %12.6g]  %-6s %s\n", r[0].c_str(), v, se, lo, hi,
                      r[6].c_str(), r[5].c_str());
        os << buf;
        sf << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << ',' << r[4] << ',' << r[6] << ",\"" << r[5]
           << "\"\n";
        if (r[6] != "PASS") ok = false;
    }
    if (rows.empty()) os << "(no checks)\n";
    for (const auto& f : missing) os << "missing: " << f << "\n";
    if (!missing.empty()) ok = false;
    text = os.str();
    if (std::filesystem::is_directory(dir)) {
        std::ofstream tf(dir / "report.txt", std::ios::trunc);
        tf << text;
    }
    return ok;
}

} // namespace hsgas::exp
