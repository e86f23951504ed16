// Command-line front end. Talks to the library only through the C API.

#include <traceshape/traceshape.h>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code(ts_status s) {
    switch (s) {
    case TS_OK: return kExitOk;
    case TS_ERR_ARGUMENT:
    case TS_ERR_CONFIG: return kExitConfig;
    default: return kExitRuntime;
    }
}

int report(ts_status s, const char* what) {
    if (s == TS_OK) return kExitOk;
    std::fprintf(stderr, "traceshape: %s: %s\n", what, ts_last_error());
    return exit_code(s);
}

struct Options {
    std::string config;
    long long seed = -1;
    std::string out_dir = ".";
    std::vector<std::string> sets;
    bool series = false;
    std::string axis;
    std::vector<std::string> values;  // raw, parsed in cmd_sweep
    int seeds = 5;
    std::string catalog;
    std::string observed;
    bool all_pages = false;
    int max_multiplicity = 0;
    int max_items = 0;
    unsigned long long max_partials = 0;
    bool exclude_self = false;
    std::string experiments;
};

std::string path_in(const Options& o, const char* name) { return (std::filesystem::path(o.out_dir) / name).string(); }

bool make_out_dir(const Options& o) {
    std::error_code ec;
    std::filesystem::create_directories(o.out_dir, ec);
    if (ec) std::fprintf(stderr, "traceshape: cannot create '%s': %s\n", o.out_dir.c_str(), ec.message().c_str());
    return !ec;
}

// Loads --config (or defaults), then --seed and --set overrides. Returns an
// exit code; *cfg is owned by the caller on success.
int build_config(const Options& o, ts_config** cfg) {
    ts_status s = o.config.empty() ? ts_config_new(cfg) : ts_config_load(o.config.c_str(), cfg);
    // An unreadable config file is a configuration problem, not a runtime one.
    if (s == TS_ERR_IO) s = TS_ERR_CONFIG;
    if (s != TS_OK) return report(s, "config");
    if (o.seed >= 0) s = ts_config_set(*cfg, "sim.seed", std::to_string(o.seed).c_str());
    for (const auto& kv : o.sets) {
        if (s != TS_OK) break;
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "traceshape: --set expects key=value, got '%s'\n", kv.c_str());
            ts_config_free(*cfg);
            return kExitConfig;
        }
        s = ts_config_set(*cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    }
    if (s == TS_OK) s = ts_config_validate(*cfg);
    if (s != TS_OK) {
        ts_config_free(*cfg);
        return report(s, "config");
    }
    return kExitOk;
}

int cmd_simulate(const Options& o) {
    ts_config* cfg = nullptr;
    if (const int rc = build_config(o, &cfg)) return rc;
    if (!make_out_dir(o)) {
        ts_config_free(cfg);
        return kExitRuntime;
    }
    ts_result* r = nullptr;
    ts_status s = ts_simulate(cfg, o.series ? TS_RECORD_SERIES : 0u, &r);
    ts_config_free(cfg);
    if (s != TS_OK) return report(s, "simulate");

    s = ts_result_write_summary(r, path_in(o, "summary.csv").c_str());
    if (s == TS_OK) s = ts_result_write_trace_sequence(r, path_in(o, "trace_sequence.csv").c_str());
    if (s == TS_OK && o.series) s = ts_result_write_series(r, path_in(o, "series.csv").c_str());
    ts_summary sum{};
    if (s == TS_OK) s = ts_result_summary(r, &sum);
    ts_result_free(r);
    if (s != TS_OK) return report(s, "simulate");

    std::printf("arrivals=%llu served=%llu backlog=%llu dummies=%llu dummy_fraction=%.6f delay_mean_ms=%.3f "
                "delay_p50_ms=%.3f delay_p95_ms=%.3f traces=%llu\n",
                static_cast<unsigned long long>(sum.arrivals), static_cast<unsigned long long>(sum.served),
                static_cast<unsigned long long>(sum.backlog), static_cast<unsigned long long>(sum.dummies),
                sum.dummy_fraction, sum.delay_mean_ms, sum.delay_p50_ms, sum.delay_p95_ms,
                static_cast<unsigned long long>(sum.traces_started));
    return kExitOk;
}

int cmd_sweep(const Options& o) {
    if (o.axis.empty()) {
        std::fprintf(stderr, "traceshape: sweep needs --axis\n");
        return kExitConfig;
    }
    std::vector<double> values;
    for (const auto& v : o.values) {
        if (v.empty()) continue;
        std::size_t used = 0;
        try {
            values.push_back(std::stod(v, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != v.size()) {
            std::fprintf(stderr, "traceshape: sweep: bad value '%s'\n", v.c_str());
            return kExitConfig;
        }
    }
    if (values.empty()) {
        std::fprintf(stderr, "traceshape: sweep needs a non-empty --values list\n");
        return kExitConfig;
    }
    ts_config* cfg = nullptr;
    if (const int rc = build_config(o, &cfg)) return rc;
    if (!make_out_dir(o)) {
        ts_config_free(cfg);
        return kExitRuntime;
    }
    const auto out = path_in(o, ("sweep_" + o.axis + ".csv").c_str());
    int failed = 0;
    const ts_status s = ts_sweep(cfg, o.axis.c_str(), values.data(), values.size(), o.seeds, out.c_str(), &failed);
    ts_config_free(cfg);
    if (s != TS_OK) return report(s, "sweep");
    std::printf("points=%zu seeds=%d failed_runs=%d table=%s\n", values.size(), o.seeds, failed, out.c_str());
    if (failed > 0) {
        std::fprintf(stderr, "traceshape: sweep: %d run(s) rejected; see the error column\n", failed);
        return kExitConfig;
    }
    return kExitOk;
}

int cmd_analyze(const Options& o) {
    if (o.catalog.empty()) {
        std::fprintf(stderr, "traceshape: analyze needs --catalog\n");
        return kExitConfig;
    }
    if (o.all_pages == !o.observed.empty()) {
        std::fprintf(stderr, "traceshape: analyze needs exactly one of --all-pages, --observed\n");
        return kExitConfig;
    }
    if (!make_out_dir(o)) return kExitRuntime;
    ts_analyze_options opts;
    ts_analyze_options_init(&opts);
    if (o.max_multiplicity > 0) opts.max_multiplicity = o.max_multiplicity;
    if (o.max_items > 0) opts.max_items = o.max_items;
    if (o.max_partials > 0) opts.max_partials = o.max_partials;
    opts.exclude_self = o.exclude_self ? 1 : 0;
    const auto out = path_in(o, "analysis.csv");
    size_t flagged = 0;
    const ts_status s =
        ts_analyze(o.catalog.c_str(), o.observed.empty() ? nullptr : o.observed.c_str(), &opts, out.c_str(), &flagged);
    if (s == TS_ERR_IO) return report(TS_ERR_CONFIG, "analyze");
    if (s != TS_OK && s != TS_ERR_BUDGET) return report(s, "analyze");
    std::printf("report=%s budget_flagged=%zu\n", out.c_str(), flagged);
    return report(s, "analyze");
}

int cmd_run(const Options& o, bool out_dir_given) {
    if (!std::filesystem::is_regular_file(o.experiments)) {
        std::fprintf(stderr, "traceshape: run: cannot open '%s'\n", o.experiments.c_str());
        return kExitConfig;
    }
    const ts_status s =
        ts_run_experiments(o.experiments.c_str(), out_dir_given ? o.out_dir.c_str() : nullptr, o.seed);
    if (s == TS_OK) std::printf("experiments=%s ok\n", o.experiments.c_str());
    return report(s, "run");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traffic-shaping simulator and indistinguishability analyzer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ts_version()));

    Options o;
    app.add_option("--config", o.config, "YAML configuration (or a CSV written by this tool)");
    app.add_option("--seed", o.seed, "Override sim.seed")->check(CLI::NonNegativeNumber);
    auto* out_dir = app.add_option("--out-dir", o.out_dir, "Output directory");
    app.add_option("--set", o.sets, "Override a configuration key: key=value (repeatable)");
    app.add_flag("--series", o.series, "Also write the per-slot series");
    app.add_option("--axis", o.axis, "Sweep axis: gamma, rate, flows, trace_n, trace_P");
    app.add_option("--values", o.values, "Sweep values, comma separated")->delimiter(',');
    app.add_option("--seeds", o.seeds, "Seeds per sweep point")->check(CLI::PositiveNumber);
    app.add_option("--catalog", o.catalog, "Page catalog CSV (page_id,g0,g1,...)");
    app.add_option("--observed", o.observed, "Observed trace sequences");
    app.add_flag("--all-pages", o.all_pages, "Report every page over all catalog sequences");
    app.add_option("--max-multiplicity", o.max_multiplicity, "Placements of any one sequence")
        ->check(CLI::PositiveNumber);
    app.add_option("--max-items", o.max_items, "Placements in total")->check(CLI::PositiveNumber);
    app.add_option("--max-partials", o.max_partials, "Search budget")->check(CLI::PositiveNumber);
    app.add_flag("--exclude-self", o.exclude_self, "Drop the trivial single-fetch explanation");

    auto* simulate = app.add_subcommand("simulate", "Run one simulation");
    auto* sweep = app.add_subcommand("sweep", "Sweep one parameter over seeds");
    auto* analyze = app.add_subcommand("analyze", "Deniability report for a page catalog");
    auto* run = app.add_subcommand("run", "Run every experiment in an experiments file");
    run->add_option("experiments", o.experiments, "Experiments file")->required();
    for (auto* sub : {simulate, sweep, analyze, run}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (*simulate) return cmd_simulate(o);
    if (*sweep) return cmd_sweep(o);
    if (*analyze) return cmd_analyze(o);
    return cmd_run(o, out_dir->count() > 0);
}
