#pragma once

#include "scheduler.hpp"
#include "trace.hpp"
#include "workload.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace traceshape {

struct SimConfig {
    WorkloadSpec workload;
    SchedulerKind scheduler_kind = SchedulerKind::enhanced;
    SchedulerParams params;
    std::int64_t trace_n = 9615;
    std::int64_t trace_P = 1682;
    Slot duration_slots = 300'000;
    double slot_duration_ms = 1.0;
    std::uint64_t seed = 1;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Throws ConfigError on the first violated constraint.
void validate(const SimConfig& config);

struct RunOptions {
    bool record_series = false;
    bool record_packets = false;    // keep every served PacketRecord
    bool record_decisions = false;  // one Decision per scheduler invocation
};

struct SlotSample {
    std::int64_t arrivals = 0;
    std::int64_t emitted = 0;
    std::int64_t dummies = 0;
    int active_traces = 0;
    double queue = 0.0;

    friend bool operator==(const SlotSample&, const SlotSample&) = default;
};

struct Decision {
    Slot slot = 0;
    int start_new = 0;
    double target = 0.0;
    double queue = 0.0;  // scheduler queue before the decision

    friend bool operator==(const Decision&, const Decision&) = default;
};

struct Metrics {
    std::uint64_t arrivals = 0;
    std::uint64_t served = 0;
    std::uint64_t dummies = 0;
    std::uint64_t emitted = 0;
    std::uint64_t backlog = 0;  // user packets still queued at the end
    std::uint64_t traces_started = 0;
    std::uint64_t traces_completed = 0;
    // Completed traces whose emission count differed from P. Always 0 unless
    // the engine is broken; kept as an auditable counter.
    std::uint64_t trace_shortfalls = 0;

    double dummy_fraction = 0.0;  // 0 when nothing was emitted
    double delay_mean_ms = 0.0;
    double delay_p50_ms = 0.0;
    double delay_p95_ms = 0.0;
    double delay_max_ms = 0.0;
    double final_queue = 0.0;  // scheduler virtual queue at the horizon
    std::int64_t groups = 0;   // complete groups of n slots simulated

    std::vector<std::int64_t> trace_sequence;  // traces started per group
    std::vector<SlotSample> series;
    std::vector<PacketRecord> served_packets;
    std::vector<Decision> decisions;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

Metrics run_simulation(const SimConfig& config, const RunOptions& options = {});
// Replay rows supplied directly instead of read from workload.replay_path.
Metrics run_simulation(const SimConfig& config, std::vector<ReplayRow> replay, const RunOptions& options = {});

struct StepResponse {
    std::optional<Slot> lag_up;
    std::optional<Slot> lag_down;
};

// Runs two simulations with a rate step at step_slot (low -> high and
// high -> low, per-user rates) and measures the slots until the nominal
// trace service rate (active traces * P/n) reaches 0.9 * high, respectively
// falls to 1.1 * low or below. Empty when the horizon is reached first.
StepResponse step_response(const SimConfig& config, Slot step_slot, double low_rate, double high_rate);

enum class SweepAxis { gamma, rate, flows, trace_n, trace_P };
const char* to_string(SweepAxis axis) noexcept;
std::optional<SweepAxis> parse_sweep_axis(std::string_view s) noexcept;

// Applies one sweep coordinate to a copy of base.
SimConfig apply_axis(const SimConfig& base, SweepAxis axis, double value);

struct Quartiles {
    double q1 = 0.0, median = 0.0, q3 = 0.0;
};
// Linear-interpolated quartiles; all zero for an empty sample.
Quartiles quartiles(std::vector<double> values);

struct SweepPoint {
    double value = 0.0;
    int runs = 0;
    int failed = 0;
    std::string error;  // first validation or runtime error at this point
    Quartiles dummy_fraction;
    Quartiles delay_mean_ms;
    Quartiles delay_p95_ms;
    Quartiles served_ratio;
};

// One run per value per seed (seeds base.seed, base.seed+1, ...). Runs may
// execute on several threads; the result is independent of thread count.
std::vector<SweepPoint> sweep(const SimConfig& base, SweepAxis axis, std::span<const double> values, int seeds,
                              unsigned threads = 0);

} // namespace traceshape
