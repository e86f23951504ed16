#include "traceshape/traceshape.h"

#include "config.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "outputs.hpp"

#include <algorithm>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

using namespace traceshape;

struct ts_config {
    SimConfig config;
};

struct ts_result {
    SimConfig config;
    Metrics metrics;
    bool has_series = false;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_key;
thread_local int g_error_line = 0;

ts_status fail(ts_status s, const std::string& msg, std::string key = {}, int line = 0) {
    g_error = msg;
    g_error_key = std::move(key);
    g_error_line = line;
    return s;
}

ts_status ok() {
    g_error.clear();
    g_error_key.clear();
    g_error_line = 0;
    return TS_OK;
}

// Maps the core exception hierarchy onto status codes.
template <class F>
ts_status guarded(F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        return fail(TS_ERR_CONFIG, e.what(), e.key(), e.line());
    } catch (const BudgetError& e) {
        return fail(TS_ERR_BUDGET, e.what());
    } catch (const IoError& e) {
        return fail(TS_ERR_IO, e.what());
    } catch (const ParamError& e) {
        return fail(TS_ERR_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(TS_ERR_RUNTIME, "out of memory");
    } catch (const std::exception& e) {
        return fail(TS_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(TS_ERR_RUNTIME, "unknown error");
    }
}

ts_status copy_out(const std::string& s, char* buf, size_t size, size_t* needed) {
    if (needed) *needed = s.size();
    if (buf && size > 0) {
        const size_t n = std::min(size - 1, s.size());
        std::memcpy(buf, s.data(), n);
        buf[n] = '\0';
    }
    return ok();
}

template <class W>
void write_csv(const std::string& path, W&& writer) {
    std::ostringstream ss;
    writer(ss);
    write_file(path, ss.str());
}

std::filesystem::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
    return dir;
}

} // namespace

extern "C" {

const char* ts_last_error(void) { return g_error.c_str(); }
const char* ts_last_error_key(void) { return g_error_key.c_str(); }
int ts_last_error_line(void) { return g_error_line; }

const char* ts_version(void) { return "1.0.0"; }

ts_status ts_config_new(ts_config** out) {
    if (!out) return fail(TS_ERR_ARGUMENT, "null output pointer");
    return guarded([&] {
        *out = new ts_config{};
        return ok();
    });
}

ts_status ts_config_load(const char* path, ts_config** out) {
    if (!path || !out) return fail(TS_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new ts_config{load_config(path)};
        return ok();
    });
}

ts_status ts_config_set(ts_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail(TS_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        set_config_key(cfg->config, key, value);
        return ok();
    });
}

ts_status ts_config_get(const ts_config* cfg, const char* key, char* buf, size_t size, size_t* needed) {
    if (!cfg || !key) return fail(TS_ERR_ARGUMENT, "null argument");
    return guarded([&] { return copy_out(get_config_key(cfg->config, key), buf, size, needed); });
}

ts_status ts_config_validate(const ts_config* cfg) {
    if (!cfg) return fail(TS_ERR_ARGUMENT, "null config");
    return guarded([&] {
        validate(cfg->config);
        return ok();
    });
}

ts_status ts_config_echo(const ts_config* cfg, char* buf, size_t size, size_t* needed) {
    if (!cfg) return fail(TS_ERR_ARGUMENT, "null config");
    return guarded([&] { return copy_out(echo_config(cfg->config), buf, size, needed); });
}

void ts_config_free(ts_config* cfg) { delete cfg; }

ts_status ts_simulate(const ts_config* cfg, unsigned flags, ts_result** out) {
    if (!cfg || !out) return fail(TS_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        RunOptions opts;
        opts.record_series = (flags & TS_RECORD_SERIES) != 0;
        auto r = std::make_unique<ts_result>();
        r->config = cfg->config;
        r->metrics = run_simulation(cfg->config, opts);
        r->has_series = opts.record_series;
        *out = r.release();
        return ok();
    });
}

ts_status ts_result_summary(const ts_result* r, ts_summary* out) {
    if (!r || !out) return fail(TS_ERR_ARGUMENT, "null argument");
    const auto& m = r->metrics;
    *out = ts_summary{m.arrivals,       m.served,        m.dummies,        m.emitted,         m.backlog,
                      m.traces_started, m.traces_completed, m.trace_shortfalls, m.dummy_fraction, m.delay_mean_ms,
                      m.delay_p50_ms,   m.delay_p95_ms,  m.delay_max_ms,   m.final_queue,     m.groups};
    return ok();
}

ts_status ts_result_trace_sequence(const ts_result* r, int64_t* buf, size_t cap, size_t* len) {
    if (!r) return fail(TS_ERR_ARGUMENT, "null result");
    const auto& seq = r->metrics.trace_sequence;
    if (len) *len = seq.size();
    if (buf) std::copy_n(seq.begin(), std::min(cap, seq.size()), buf);
    return ok();
}

ts_status ts_result_write_summary(const ts_result* r, const char* path) {
    if (!r || !path) return fail(TS_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        write_csv(path, [&](std::ostream& o) { write_summary_csv(o, r->config, r->metrics); });
        return ok();
    });
}

ts_status ts_result_write_series(const ts_result* r, const char* path) {
    if (!r || !path) return fail(TS_ERR_ARGUMENT, "null argument");
    if (!r->has_series) return fail(TS_ERR_ARGUMENT, "series was not recorded for this run");
    return guarded([&] {
        write_csv(path, [&](std::ostream& o) { write_series_csv(o, r->config, r->metrics); });
        return ok();
    });
}

ts_status ts_result_write_trace_sequence(const ts_result* r, const char* path) {
    if (!r || !path) return fail(TS_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        write_csv(path, [&](std::ostream& o) { write_trace_sequence_csv(o, r->config, r->metrics); });
        return ok();
    });
}

void ts_result_free(ts_result* r) { delete r; }

ts_status ts_sweep(const ts_config* cfg, const char* axis, const double* values, size_t count, int seeds,
                   const char* out_csv, int* failed_runs) {
    if (!cfg || !axis || !out_csv) return fail(TS_ERR_ARGUMENT, "null argument");
    const auto a = parse_sweep_axis(axis);
    if (!a) return fail(TS_ERR_ARGUMENT, std::string("unknown sweep axis '") + axis + "'");
    if (!values || count == 0) return fail(TS_ERR_ARGUMENT, "sweep needs at least one value");
    if (seeds < 1) return fail(TS_ERR_ARGUMENT, "seeds must be >= 1");
    return guarded([&] {
        validate(cfg->config);
        const auto points = sweep(cfg->config, *a, std::span<const double>(values, count), seeds);
        write_csv(out_csv, [&](std::ostream& o) { write_sweep_csv(o, cfg->config, *a, seeds, points); });
        int failed = 0;
        for (const auto& p : points) failed += p.failed;
        if (failed_runs) *failed_runs = failed;
        return ok();
    });
}

ts_status ts_step_response(const ts_config* cfg, int64_t step_slot, double low_rate, double high_rate,
                           int64_t* lag_up, int64_t* lag_down) {
    if (!cfg) return fail(TS_ERR_ARGUMENT, "null config");
    return guarded([&] {
        const auto r = step_response(cfg->config, step_slot, low_rate, high_rate);
        if (lag_up) *lag_up = r.lag_up.value_or(-1);
        if (lag_down) *lag_down = r.lag_down.value_or(-1);
        return ok();
    });
}

void ts_analyze_options_init(ts_analyze_options* opts) {
    if (!opts) return;
    const SearchLimits d;
    opts->max_multiplicity = d.max_multiplicity;
    opts->max_items = d.max_items;
    opts->max_partials = d.max_partials;
    opts->exclude_self = 0;
}

ts_status ts_analyze(const char* catalog_csv, const char* observed_csv, const ts_analyze_options* opts,
                     const char* out_csv, size_t* flagged_rows) {
    if (!catalog_csv || !out_csv) return fail(TS_ERR_ARGUMENT, "null argument");
    ts_analyze_options o;
    ts_analyze_options_init(&o);
    if (opts) o = *opts;
    if (o.max_multiplicity < 1 || o.max_items < 1 || o.max_partials < 1)
        return fail(TS_ERR_ARGUMENT, "search limits must be >= 1");
    return guarded([&] {
        AnalysisRequest req;
        req.catalog_path = catalog_csv;
        if (observed_csv) req.observed_path = observed_csv;
        req.limits = {o.max_multiplicity, o.max_items, o.max_partials};
        req.options.exclude_self = o.exclude_self != 0;
        std::ostringstream ss;
        const auto outcome = run_analysis(req, ss);
        write_file(out_csv, ss.str());
        if (flagged_rows) *flagged_rows = outcome.flagged;
        if (outcome.flagged > 0)
            return fail(TS_ERR_BUDGET, std::to_string(outcome.flagged) + " row(s) exceeded the search budget");
        return ok();
    });
}

ts_status ts_run_experiments(const char* path, const char* out_dir, int64_t seed_override) {
    if (!path) return fail(TS_ERR_ARGUMENT, "null path");
    ExperimentFile file;
    if (const auto s = guarded([&] {
            file = load_experiment_file(path);
            for (auto& e : file.experiments) {
                if (seed_override >= 0) e.config.seed = static_cast<std::uint64_t>(seed_override);
                if (e.kind != Experiment::Kind::analyze) validate(e.config);
            }
            return ok();
        });
        s != TS_OK)
        return s;

    std::filesystem::path dir;
    if (const auto s = guarded([&] {
            dir = prepare_dir(out_dir ? std::string(out_dir) : file.out_dir);
            return ok();
        });
        s != TS_OK)
        return s;

    ts_status first = TS_OK;
    std::string first_msg;
    for (const auto& e : file.experiments) {
        const auto base = (dir / e.name).string();
        const auto s = guarded([&] {
            switch (e.kind) {
            case Experiment::Kind::simulate: {
                RunOptions opts;
                opts.record_series = e.series;
                const auto m = run_simulation(e.config, opts);
                write_csv(base + "_summary.csv", [&](std::ostream& o) { write_summary_csv(o, e.config, m); });
                write_csv(base + "_trace_sequence.csv",
                          [&](std::ostream& o) { write_trace_sequence_csv(o, e.config, m); });
                if (e.series)
                    write_csv(base + "_series.csv", [&](std::ostream& o) { write_series_csv(o, e.config, m); });
                return ok();
            }
            case Experiment::Kind::sweep: {
                const auto points = traceshape::sweep(e.config, e.axis, e.values, e.seeds);
                write_csv(base + "_sweep.csv",
                          [&](std::ostream& o) { write_sweep_csv(o, e.config, e.axis, e.seeds, points); });
                return ok();
            }
            case Experiment::Kind::analyze: {
                AnalysisRequest req{e.catalog, e.observed, e.limits, HistoryOptions{e.exclude_self}};
                std::ostringstream ss;
                const auto outcome = run_analysis(req, ss);
                write_file(base + "_analysis.csv", ss.str());
                if (outcome.flagged > 0)
                    return fail(TS_ERR_BUDGET,
                                std::to_string(outcome.flagged) + " row(s) exceeded the search budget");
                return ok();
            }
            }
            return ok();
        });
        if (s != TS_OK && first == TS_OK) {
            first = s;
            first_msg = e.name + ": " + g_error;
        }
    }
    if (first != TS_OK) return fail(first, first_msg);
    return ok();
}

} // extern "C"
