#include "engine.hpp"

#include "errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <memory>
#include <thread>
#include <variant>

namespace traceshape {

namespace {

void validate_impl(const SimConfig& c, bool need_replay_path) {
    if (c.trace_n < 1) throw ConfigError("trace.n", 0, "must be >= 1");
    if (c.trace_P < 1) throw ConfigError("trace.P", 0, "must be >= 1");
    if (c.duration_slots < c.trace_n)
        throw ConfigError("sim.duration_slots", 0,
                          "must be >= trace.n (" + std::to_string(c.trace_n) + "), got " +
                              std::to_string(c.duration_slots));
    if (!(c.slot_duration_ms > 0.0)) throw ConfigError("sim.slot_duration_ms", 0, "must be > 0");

    const auto& w = c.workload;
    if (w.n_users < 1) throw ConfigError("workload.n_users", 0, "must be >= 1");
    if (!(w.rate >= 0.0) || !std::isfinite(w.rate)) throw ConfigError("workload.rate", 0, "must be finite and >= 0");
    if (!(w.step_rate >= 0.0) || !std::isfinite(w.step_rate))
        throw ConfigError("workload.step_rate", 0, "must be finite and >= 0");
    if (w.step_slot && *w.step_slot < 0) throw ConfigError("workload.step_slot", 0, "must be >= 0");
    if (w.kind == WorkloadKind::onoff_fetch) {
        if (!(w.onoff.peak_rate > 0.0)) throw ConfigError("workload.peak_rate", 0, "must be > 0");
        if (!(w.onoff.burst_median > 0.0)) throw ConfigError("workload.burst_median", 0, "must be > 0");
        if (!(w.onoff.burst_sigma >= 0.0)) throw ConfigError("workload.burst_sigma", 0, "must be >= 0");
        if (!(w.onoff.think_mean_slots >= 0.0)) throw ConfigError("workload.think_mean_slots", 0, "must be >= 0");
    }
    if (need_replay_path && w.kind == WorkloadKind::replay && w.replay_path.empty())
        throw ConfigError("workload.replay_path", 0, "required for kind replay");

    validate(c.params, Trace::uniform(c.trace_n, c.trace_P));
}

struct RunningTrace {
    ActiveTrace active;
    std::int64_t emitted = 0;
};

using AnyScheduler =
    std::variant<SyncBangBangScheduler, SyncIncrementalScheduler, UnsyncScheduler, EnhancedUnsyncScheduler>;

AnyScheduler make_scheduler(const SimConfig& c) {
    switch (c.scheduler_kind) {
    case SchedulerKind::sync_bangbang: return SyncBangBangScheduler(c.params, c.trace_P);
    case SchedulerKind::sync_incremental: return SyncIncrementalScheduler(c.params, c.trace_P);
    case SchedulerKind::unsync: return UnsyncScheduler(c.params, c.trace_P);
    case SchedulerKind::enhanced: return EnhancedUnsyncScheduler(c.params, c.trace_P);
    }
    return UnsyncScheduler(c.params, c.trace_P);
}

double scheduler_queue(const AnyScheduler& s) {
    return std::visit([](const auto& x) { return x.queue(); }, s);
}

// Nearest-rank percentile over a histogram of integer delays.
double percentile_slots(const std::vector<std::uint64_t>& hist, std::uint64_t total, double p) {
    if (total == 0) return 0.0;
    const auto rank = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(p * static_cast<double>(total))));
    std::uint64_t cum = 0;
    for (std::size_t d = 0; d < hist.size(); ++d) {
        cum += hist[d];
        if (cum >= rank) return static_cast<double>(d);
    }
    return static_cast<double>(hist.size() - 1);
}

} // namespace

void validate(const SimConfig& config) { validate_impl(config, true); }

Metrics run_simulation(const SimConfig& config, const RunOptions& options) {
    validate(config);
    std::vector<ReplayRow> replay;
    if (config.workload.kind == WorkloadKind::replay) replay = load_replay_csv(config.workload.replay_path);
    return run_simulation(config, std::move(replay), options);
}

Metrics run_simulation(const SimConfig& config, std::vector<ReplayRow> replay, const RunOptions& options) {
    validate_impl(config, false);

    const auto trace = std::make_shared<const Trace>(Trace::uniform(config.trace_n, config.trace_P));
    const Slot n = config.trace_n;
    const bool synchronized = is_synchronized(config.scheduler_kind);

    ArrivalGenerator gen(config.workload, config.seed, std::move(replay));
    AnyScheduler sched = make_scheduler(config);

    Metrics m;
    m.groups = config.duration_slots / n;
    m.trace_sequence.assign(static_cast<std::size_t>((config.duration_slots + n - 1) / n), 0);
    if (options.record_series) m.series.reserve(static_cast<std::size_t>(config.duration_slots));

    std::deque<PacketRecord> backlog;
    std::vector<RunningTrace> running;
    std::vector<PacketRecord> arrivals;
    std::vector<std::uint64_t> delay_hist;
    std::uint64_t delay_sum = 0;
    std::uint64_t next_trace_id = 0;
    std::int64_t group_arrivals = 0;
    int sync_traces = 0;

    for (Slot k = 0; k < config.duration_slots; ++k) {
        // (1) arrivals join the global FIFO; within a slot they come ordered by user
        arrivals.clear();
        gen.arrivals_at(k, arrivals);
        const auto a_k = static_cast<std::int64_t>(arrivals.size());
        bool saw_dns = false;
        for (auto& p : arrivals) {
            saw_dns = saw_dns || p.is_dns;
            backlog.push_back(p);
        }
        m.arrivals += static_cast<std::uint64_t>(a_k);

        // expire finished traces (half-open windows)
        std::erase_if(running, [&](const RunningTrace& t) {
            if (t.active.end_slot() > k) return false;
            ++m.traces_completed;
            if (t.emitted != trace->packets()) ++m.trace_shortfalls;
            return true;
        });
        const int active_count = static_cast<int>(running.size());

        // (2) scheduler decision for this slot
        int start_new = 0;
        const double queue_before = scheduler_queue(sched);
        double target = 0.0;
        bool decided = false;
        if (synchronized) {
            if (k % n == 0) {
                if (auto* bb = std::get_if<SyncBangBangScheduler>(&sched)) {
                    sync_traces = bb->decide();
                } else {
                    sync_traces = std::get<SyncIncrementalScheduler>(sched).decide();
                }
                start_new = sync_traces;
                target = sync_traces;
                decided = true;
            }
        } else if (auto* us = std::get_if<UnsyncScheduler>(&sched)) {
            const auto act = us->decide(active_count);
            start_new = act.start_new;
            target = act.target_z;
            decided = true;
        } else {
            const auto act = std::get<EnhancedUnsyncScheduler>(sched).decide(a_k, saw_dns, active_count);
            start_new = act.start_new;
            target = act.target_z;
            decided = true;
        }
        if (decided && options.record_decisions) m.decisions.push_back({k, start_new, target, queue_before});

        // (3) start traces
        for (int i = 0; i < start_new; ++i) {
            running.push_back({ActiveTrace{trace, k, next_trace_id++}, 0});
        }
        m.traces_started += static_cast<std::uint64_t>(start_new);
        m.trace_sequence[static_cast<std::size_t>(k / n)] += start_new;

        // (4) required emission
        std::int64_t emit = 0;
        for (auto& t : running) {
            const auto e = emission_at(t.active, k);
            t.emitted += e;
            emit += e;
        }
        // (7) validation guarantees this; a breach is an engine bug
        if (emit > config.params.c)
            throw std::logic_error("emission " + std::to_string(emit) + " exceeds link capacity at slot " +
                                   std::to_string(k));

        // (5) serve user packets in FIFO order
        const auto served = std::min<std::int64_t>(emit, static_cast<std::int64_t>(backlog.size()));
        for (std::int64_t i = 0; i < served; ++i) {
            PacketRecord p = std::move(backlog.front());
            backlog.pop_front();
            const auto d = static_cast<std::size_t>(k - p.arrival_slot);
            if (d >= delay_hist.size()) delay_hist.resize(d + 1, 0);
            ++delay_hist[d];
            delay_sum += d;
            if (options.record_packets) {
                p.departure_slot = k;
                m.served_packets.push_back(std::move(p));
            }
        }
        // (6) dummies fill the rest
        const std::int64_t dummies = emit - served;
        m.served += static_cast<std::uint64_t>(served);
        m.dummies += static_cast<std::uint64_t>(dummies);
        m.emitted += static_cast<std::uint64_t>(emit);

        // scheduler bookkeeping after the slot
        if (synchronized) {
            group_arrivals += a_k;
            if (k % n == n - 1) {
                if (auto* bb = std::get_if<SyncBangBangScheduler>(&sched)) {
                    bb->commit(group_arrivals, sync_traces);
                } else {
                    std::get<SyncIncrementalScheduler>(sched).commit(group_arrivals);
                }
                group_arrivals = 0;
            }
        } else if (auto* us = std::get_if<UnsyncScheduler>(&sched)) {
            us->observe(a_k, emit);
        } else {
            std::get<EnhancedUnsyncScheduler>(sched).observe(a_k, emit);
        }

        if (options.record_series) {
            m.series.push_back({a_k, emit, dummies, static_cast<int>(running.size()), scheduler_queue(sched)});
        }
    }

    m.backlog = backlog.size();
    m.final_queue = scheduler_queue(sched);
    m.dummy_fraction = m.emitted == 0 ? 0.0 : static_cast<double>(m.dummies) / static_cast<double>(m.emitted);
    const double ms = config.slot_duration_ms;
    if (m.served > 0) {
        m.delay_mean_ms = static_cast<double>(delay_sum) / static_cast<double>(m.served) * ms;
        m.delay_p50_ms = percentile_slots(delay_hist, m.served, 0.50) * ms;
        m.delay_p95_ms = percentile_slots(delay_hist, m.served, 0.95) * ms;
        m.delay_max_ms = static_cast<double>(delay_hist.size() - 1) * ms;
    }
    return m;
}

// --- step response ----------------------------------------------------------

StepResponse step_response(const SimConfig& config, Slot step_slot, double low_rate, double high_rate) {
    if (step_slot <= 0 || step_slot >= config.duration_slots)
        throw ParamError("step_slot must lie strictly inside the run");

    const double trace_rate = static_cast<double>(config.trace_P) / static_cast<double>(config.trace_n);
    const double users = config.workload.n_users;

    auto first_slot = [&](double from, double to, auto reached) -> std::optional<Slot> {
        SimConfig c = config;
        c.workload.rate = from;
        c.workload.step_slot = step_slot;
        c.workload.step_rate = to;
        RunOptions opt;
        opt.record_series = true;
        const auto m = run_simulation(c, opt);
        for (Slot k = step_slot; k < static_cast<Slot>(m.series.size()); ++k) {
            const double service = m.series[static_cast<std::size_t>(k)].active_traces * trace_rate;
            if (reached(service)) return k - step_slot;
        }
        return std::nullopt;
    };

    StepResponse r;
    const double high = high_rate * users;
    const double low = low_rate * users;
    r.lag_up = first_slot(low_rate, high_rate, [&](double s) { return s >= 0.9 * high; });
    r.lag_down = first_slot(high_rate, low_rate, [&](double s) { return s <= 1.1 * low; });
    return r;
}

// --- sweeps -----------------------------------------------------------------

const char* to_string(SweepAxis axis) noexcept {
    switch (axis) {
    case SweepAxis::gamma: return "gamma";
    case SweepAxis::rate: return "rate";
    case SweepAxis::flows: return "flows";
    case SweepAxis::trace_n: return "trace_n";
    case SweepAxis::trace_P: return "trace_P";
    }
    return "?";
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view s) noexcept {
    if (s == "gamma") return SweepAxis::gamma;
    if (s == "rate") return SweepAxis::rate;
    if (s == "flows") return SweepAxis::flows;
    if (s == "trace_n") return SweepAxis::trace_n;
    if (s == "trace_P") return SweepAxis::trace_P;
    return std::nullopt;
}

SimConfig apply_axis(const SimConfig& base, SweepAxis axis, double value) {
    SimConfig c = base;
    switch (axis) {
    case SweepAxis::gamma: c.params.gamma = value; break;
    case SweepAxis::rate: c.workload.rate = value; break;
    case SweepAxis::flows: c.workload.n_users = static_cast<int>(std::llround(value)); break;
    case SweepAxis::trace_n: c.trace_n = std::llround(value); break;
    case SweepAxis::trace_P: c.trace_P = std::llround(value); break;
    }
    return c;
}

Quartiles quartiles(std::vector<double> v) {
    if (v.empty()) return {};
    std::sort(v.begin(), v.end());
    auto at = [&](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    return {at(0.25), at(0.5), at(0.75)};
}

std::vector<SweepPoint> sweep(const SimConfig& base, SweepAxis axis, std::span<const double> values, int seeds,
                              unsigned threads) {
    if (values.empty()) throw ParamError("sweep needs at least one value");
    if (seeds < 1) throw ParamError("sweep needs at least one seed");

    struct Outcome {
        bool ok = false;
        std::string error;
        double dummy = 0, delay_mean = 0, delay_p95 = 0, served_ratio = 0;
    };
    const std::size_t jobs = values.size() * static_cast<std::size_t>(seeds);
    std::vector<Outcome> out(jobs);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            const std::size_t vi = j / static_cast<std::size_t>(seeds);
            const auto si = static_cast<std::uint64_t>(j % static_cast<std::size_t>(seeds));
            Outcome& o = out[j];
            try {
                SimConfig c = apply_axis(base, axis, values[vi]);
                c.seed = base.seed + si;
                const auto m = run_simulation(c);
                o.ok = true;
                o.dummy = m.dummy_fraction;
                o.delay_mean = m.delay_mean_ms;
                o.delay_p95 = m.delay_p95_ms;
                o.served_ratio = m.arrivals == 0 ? 1.0 : static_cast<double>(m.served) / static_cast<double>(m.arrivals);
            } catch (const std::exception& e) {
                o.error = e.what();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    std::vector<SweepPoint> points;
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        SweepPoint p;
        p.value = values[vi];
        std::vector<double> dummy, dmean, dp95, ratio;
        for (int s = 0; s < seeds; ++s) {
            const auto& o = out[vi * static_cast<std::size_t>(seeds) + static_cast<std::size_t>(s)];
            if (!o.ok) {
                ++p.failed;
                if (p.error.empty()) p.error = o.error;
                continue;
            }
            ++p.runs;
            dummy.push_back(o.dummy);
            dmean.push_back(o.delay_mean);
            dp95.push_back(o.delay_p95);
            ratio.push_back(o.served_ratio);
        }
        p.dummy_fraction = quartiles(dummy);
        p.delay_mean_ms = quartiles(dmean);
        p.delay_p95_ms = quartiles(dp95);
        p.served_ratio = quartiles(ratio);
        points.push_back(std::move(p));
    }
    return points;
}

} // namespace traceshape
