#pragma once

#include "trace.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace traceshape {

enum class SchedulerKind { sync_bangbang, sync_incremental, unsync, enhanced };

const char* to_string(SchedulerKind kind) noexcept;
std::optional<SchedulerKind> parse_scheduler_kind(std::string_view s) noexcept;
inline bool is_synchronized(SchedulerKind k) noexcept {
    return k == SchedulerKind::sync_bangbang || k == SchedulerKind::sync_incremental;
}

struct SchedulerParams {
    double gamma = 1024.0;   // backlog target scale
    double alpha = 1.0;      // virtual-queue gain (unsynchronized kinds)
    int y_max = 20;          // simultaneous trace cap
    double zeta = 0.001;     // running-average gain
    double a_star = 0.005;   // running-average wake threshold
    int m = 100;             // hysteresis window in slots; 0 disables
    int c = 20;              // link capacity, packets per slot
    bool dns_trigger = true;

    friend bool operator==(const SchedulerParams&, const SchedulerParams&) = default;
};

// Throws ConfigError naming the offending key. Checks the capacity
// constraint y_max * max_slot_emission <= c.
void validate(const SchedulerParams& params, const Trace& trace);

// Sign of the minimiser of coefficient * x over x in [-1, 1]: +1 when the
// coefficient is negative, -1 when positive, 0 on a tie.
int argmin_direction(double coefficient) noexcept;

// Bang-bang rule over whole groups of n slots.
class SyncBangBangScheduler {
public:
    SyncBangBangScheduler(const SchedulerParams& params, std::int64_t packets_per_trace);

    // Trace count for the coming group, from the current queue.
    int decide() const noexcept;
    // Folds in the arrivals of a finished group served by `traces` traces.
    void commit(std::int64_t group_arrivals, int traces) noexcept;
    // decide() followed by commit(); returns the chosen count.
    int step(std::int64_t group_arrivals) noexcept;

    double queue() const noexcept { return queue_; }
    void set_queue(double q) noexcept { queue_ = q; }

private:
    SchedulerParams params_;
    double packets_;
    double queue_ = 0.0;
};

// Moves the trace count by at most one per group.
class SyncIncrementalScheduler {
public:
    SyncIncrementalScheduler(const SchedulerParams& params, std::int64_t packets_per_trace);

    // Updates and returns the trace count for the coming group.
    int decide() noexcept;
    // Folds in the arrivals of the group just served by traces().
    void commit(std::int64_t group_arrivals) noexcept;
    int step(std::int64_t group_arrivals) noexcept;

    int traces() const noexcept { return traces_; }
    double queue() const noexcept { return queue_; }
    void set_state(double q, int traces) noexcept { queue_ = q; traces_ = traces; }

private:
    SchedulerParams params_;
    double packets_;
    double queue_ = 0.0;
    int traces_ = 0;
};

struct TraceActions {
    int start_new = 0;
    double target_z = 0.0;

    friend bool operator==(const TraceActions&, const TraceActions&) = default;
};

// Per-slot scheduler: target z moves by at most one per slot; the engine
// starts start_new traces in the slot the decision is taken.
//
// Each slot is a decide() (before emissions are known) and an observe()
// (once the slot's emission is fixed).
class UnsyncScheduler {
public:
    UnsyncScheduler(const SchedulerParams& params, std::int64_t packets_per_trace);

    TraceActions decide(int active_count) noexcept;
    void observe(std::int64_t arrivals, std::int64_t emitted) noexcept;
    TraceActions step(std::int64_t arrivals, std::int64_t emitted, int active_count) noexcept;

    double queue() const noexcept { return queue_; }
    double target() const noexcept { return z_; }
    void set_state(double q, double z) noexcept { queue_ = q; z_ = z; }

private:
    SchedulerParams params_;
    double packets_;
    double queue_ = 0.0;
    double z_ = 0.0;
};

// Unsynchronized scheduler with DNS wake, running-average wake, hysteresis
// on the virtual queue trend and the max{a_bar, a_k} queue input.
class EnhancedUnsyncScheduler {
public:
    EnhancedUnsyncScheduler(const SchedulerParams& params, std::int64_t packets_per_trace);

    TraceActions decide(std::int64_t arrivals, bool saw_dns, int active_count) noexcept;
    void observe(std::int64_t arrivals, std::int64_t emitted) noexcept;
    TraceActions step(std::int64_t arrivals, std::int64_t emitted, bool saw_dns, int active_count) noexcept;

    double queue() const noexcept { return queue_; }
    double target() const noexcept { return z_; }
    double running_average() const noexcept { return a_bar_; }
    void set_state(double q, double z, double a_bar) noexcept { queue_ = q; z_ = z; a_bar_ = a_bar; }

private:
    // Values recorded m slots ago, if the history is long enough.
    std::optional<double> queue_lag() const noexcept;
    std::optional<double> drift_lag() const noexcept;

    SchedulerParams params_;
    double packets_;
    double queue_ = 0.0;
    double drift_ = 0.0;  // unclamped running sum of alpha*(input - emitted)
    double z_ = 0.0;
    double a_bar_ = 0.0;
    // Rings of the last m+1 queue and drift values.
    std::vector<double> queue_hist_;
    std::vector<double> drift_hist_;
    std::int64_t hist_count_ = 0;
};

// Shared start rule: fill the deficit below floor(z), start at least one when
// z increases past the active count, never exceed y_max active traces.
int traces_to_start(double z_before, double z_after, int active_count, int y_max) noexcept;

} // namespace traceshape
