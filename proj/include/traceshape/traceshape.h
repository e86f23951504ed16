#ifndef TRACESHAPE_TRACESHAPE_H
#define TRACESHAPE_TRACESHAPE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TS_API __declspec(dllexport)
#else
#define TS_API __attribute__((visibility("default")))
#endif

typedef enum ts_status {
    TS_OK = 0,
    TS_ERR_ARGUMENT = 1, /* null handle, bad enum, empty list */
    TS_ERR_CONFIG = 2,   /* configuration rejected; see ts_last_error_key/line */
    TS_ERR_BUDGET = 3,   /* combination search exceeded its budget */
    TS_ERR_IO = 4,
    TS_ERR_RUNTIME = 5
} ts_status;

typedef struct ts_config ts_config;
typedef struct ts_result ts_result;

/* Message of the last failure on the calling thread; "" after success. */
TS_API const char* ts_last_error(void);
/* Dotted key and 1-based line of the last TS_ERR_CONFIG, "" / 0 if unknown. */
TS_API const char* ts_last_error_key(void);
TS_API int ts_last_error_line(void);

TS_API const char* ts_version(void);

/* Configuration ------------------------------------------------------- */

TS_API ts_status ts_config_new(ts_config** out);
/* YAML file, or a CSV written by this library (its echoed header). */
TS_API ts_status ts_config_load(const char* path, ts_config** out);
TS_API ts_status ts_config_set(ts_config* cfg, const char* key, const char* value);
/* Copies the textual value of key into buf (always NUL-terminated);
 * *needed receives the full length excluding the terminator. */
TS_API ts_status ts_config_get(const ts_config* cfg, const char* key, char* buf, size_t size, size_t* needed);
TS_API ts_status ts_config_validate(const ts_config* cfg);
/* Canonical YAML; same buffer convention as ts_config_get. */
TS_API ts_status ts_config_echo(const ts_config* cfg, char* buf, size_t size, size_t* needed);
TS_API void ts_config_free(ts_config* cfg);

/* Simulation ---------------------------------------------------------- */

enum { TS_RECORD_SERIES = 1 };

typedef struct ts_summary {
    uint64_t arrivals;
    uint64_t served;
    uint64_t dummies;
    uint64_t emitted;
    uint64_t backlog;
    uint64_t traces_started;
    uint64_t traces_completed;
    uint64_t trace_shortfalls;
    double dummy_fraction;
    double delay_mean_ms;
    double delay_p50_ms;
    double delay_p95_ms;
    double delay_max_ms;
    double final_queue;
    int64_t groups;
} ts_summary;

TS_API ts_status ts_simulate(const ts_config* cfg, unsigned flags, ts_result** out);
TS_API ts_status ts_result_summary(const ts_result* r, ts_summary* out);
/* Copies up to cap entries; *len receives the full sequence length. */
TS_API ts_status ts_result_trace_sequence(const ts_result* r, int64_t* buf, size_t cap, size_t* len);
TS_API ts_status ts_result_write_summary(const ts_result* r, const char* path);
/* TS_ERR_ARGUMENT unless the run recorded its series. */
TS_API ts_status ts_result_write_series(const ts_result* r, const char* path);
TS_API ts_status ts_result_write_trace_sequence(const ts_result* r, const char* path);
TS_API void ts_result_free(ts_result* r);

/* axis: "gamma", "rate", "flows", "trace_n" or "trace_P". Writes the
 * per-point table; *failed_runs (nullable) receives the failed run count. */
TS_API ts_status ts_sweep(const ts_config* cfg, const char* axis, const double* values, size_t count, int seeds,
                          const char* out_csv, int* failed_runs);

/* Lags are -1 when the horizon is reached first. */
TS_API ts_status ts_step_response(const ts_config* cfg, int64_t step_slot, double low_rate, double high_rate,
                                  int64_t* lag_up, int64_t* lag_down);

/* Indistinguishability ------------------------------------------------ */

typedef struct ts_analyze_options {
    int max_multiplicity;
    int max_items;
    uint64_t max_partials;
    int exclude_self;
} ts_analyze_options;

TS_API void ts_analyze_options_init(ts_analyze_options* opts);
/* observed_csv NULL: per-page report over every catalog sequence.
 * Returns TS_ERR_BUDGET when rows were flagged; the report is still written. */
TS_API ts_status ts_analyze(const char* catalog_csv, const char* observed_csv, const ts_analyze_options* opts,
                            const char* out_csv, size_t* flagged_rows);

/* Experiment files ---------------------------------------------------- */

/* Runs every experiment in the file. out_dir (nullable) overrides the
 * file's directory; seed_override < 0 keeps each experiment's seed. The
 * first non-OK status is returned after all experiments have run. */
TS_API ts_status ts_run_experiments(const char* path, const char* out_dir, int64_t seed_override);

#ifdef __cplusplus
}
#endif

#endif
