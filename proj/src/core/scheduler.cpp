#include "scheduler.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace traceshape {

const char* to_string(SchedulerKind kind) noexcept {
    switch (kind) {
    case SchedulerKind::sync_bangbang: return "sync_bangbang";
    case SchedulerKind::sync_incremental: return "sync_incremental";
    case SchedulerKind::unsync: return "unsync";
    case SchedulerKind::enhanced: return "enhanced";
    }
    return "?";
}

std::optional<SchedulerKind> parse_scheduler_kind(std::string_view s) noexcept {
    if (s == "sync_bangbang") return SchedulerKind::sync_bangbang;
    if (s == "sync_incremental") return SchedulerKind::sync_incremental;
    if (s == "unsync") return SchedulerKind::unsync;
    if (s == "enhanced") return SchedulerKind::enhanced;
    return std::nullopt;
}

void validate(const SchedulerParams& p, const Trace& trace) {
    if (!(p.gamma >= 0.0) || !std::isfinite(p.gamma)) throw ConfigError("scheduler.gamma", 0, "must be finite and >= 0");
    if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) throw ConfigError("scheduler.alpha", 0, "must be finite and > 0");
    if (p.y_max < 1) throw ConfigError("scheduler.y_max", 0, "must be >= 1");
    if (!(p.zeta >= 0.0 && p.zeta < 1.0)) throw ConfigError("scheduler.zeta", 0, "must lie in [0, 1)");
    if (!(p.a_star >= 0.0)) throw ConfigError("scheduler.a_star", 0, "must be >= 0");
    if (p.m < 0) throw ConfigError("scheduler.m", 0, "must be >= 0");
    if (p.c < 1) throw ConfigError("link.c", 0, "must be >= 1");
    const auto peak = static_cast<std::int64_t>(p.y_max) * trace.max_emission();
    if (peak > p.c) {
        throw ConfigError("scheduler.y_max", 0,
                          "capacity constraint violated: y_max * max_slot_emission = " + std::to_string(p.y_max) +
                              " * " + std::to_string(trace.max_emission()) + " = " + std::to_string(peak) +
                              " exceeds link.c = " + std::to_string(p.c));
    }
}

int argmin_direction(double coefficient) noexcept {
    if (coefficient < 0.0) return 1;
    if (coefficient > 0.0) return -1;
    return 0;
}

int traces_to_start(double z_before, double z_after, int active_count, int y_max) noexcept {
    int want = std::max(0, static_cast<int>(std::floor(z_after)) - active_count);
    // An increase only starts a trace once z is above the active count.
    if (z_after > z_before && z_after > active_count) want = std::max(want, 1);
    return std::clamp(want, 0, std::max(0, y_max - active_count));
}

// --- synchronized bang-bang -------------------------------------------------

SyncBangBangScheduler::SyncBangBangScheduler(const SchedulerParams& params, std::int64_t packets_per_trace)
    : params_(params), packets_(static_cast<double>(packets_per_trace)) {}

int SyncBangBangScheduler::decide() const noexcept {
    // Minimiser of (gamma - Q P) y over [0, y_max]; ties go to 0.
    return params_.gamma - queue_ * packets_ < 0.0 ? params_.y_max : 0;
}

void SyncBangBangScheduler::commit(std::int64_t group_arrivals, int traces) noexcept {
    queue_ = std::max(0.0, queue_ + static_cast<double>(group_arrivals) - traces * packets_);
}

int SyncBangBangScheduler::step(std::int64_t group_arrivals) noexcept {
    const int y = decide();
    commit(group_arrivals, y);
    return y;
}

// --- synchronized incremental -----------------------------------------------

SyncIncrementalScheduler::SyncIncrementalScheduler(const SchedulerParams& params, std::int64_t packets_per_trace)
    : params_(params), packets_(static_cast<double>(packets_per_trace)) {}

int SyncIncrementalScheduler::decide() noexcept {
    const int x = argmin_direction(params_.gamma - queue_ * packets_);
    traces_ = std::clamp(traces_ + x, 0, params_.y_max);
    return traces_;
}

void SyncIncrementalScheduler::commit(std::int64_t group_arrivals) noexcept {
    queue_ = std::max(0.0, queue_ + static_cast<double>(group_arrivals) - traces_ * packets_);
}

int SyncIncrementalScheduler::step(std::int64_t group_arrivals) noexcept {
    const int y = decide();
    commit(group_arrivals);
    return y;
}

// --- baseline unsynchronized ------------------------------------------------

UnsyncScheduler::UnsyncScheduler(const SchedulerParams& params, std::int64_t packets_per_trace)
    : params_(params), packets_(static_cast<double>(packets_per_trace)) {}

TraceActions UnsyncScheduler::decide(int active_count) noexcept {
    const double before = z_;
    const int x = argmin_direction(params_.gamma - queue_ * packets_);
    z_ = std::clamp(z_ + x, 0.0, static_cast<double>(params_.y_max));
    return {traces_to_start(before, z_, active_count, params_.y_max), z_};
}

void UnsyncScheduler::observe(std::int64_t arrivals, std::int64_t emitted) noexcept {
    queue_ = std::max(0.0, queue_ + params_.alpha * static_cast<double>(arrivals - emitted));
}

TraceActions UnsyncScheduler::step(std::int64_t arrivals, std::int64_t emitted, int active_count) noexcept {
    const auto act = decide(active_count);
    observe(arrivals, emitted);
    return act;
}

// --- enhanced unsynchronized ------------------------------------------------

EnhancedUnsyncScheduler::EnhancedUnsyncScheduler(const SchedulerParams& params, std::int64_t packets_per_trace)
    : params_(params), packets_(static_cast<double>(packets_per_trace)) {
    if (params_.m > 0) {
        queue_hist_.assign(static_cast<std::size_t>(params_.m) + 1, 0.0);
        drift_hist_.assign(static_cast<std::size_t>(params_.m) + 1, 0.0);
        hist_count_ = 1;  // Q_0 = 0
    }
}

std::optional<double> EnhancedUnsyncScheduler::queue_lag() const noexcept {
    if (hist_count_ <= params_.m) return std::nullopt;
    const auto len = static_cast<std::int64_t>(queue_hist_.size());
    return queue_hist_[static_cast<std::size_t>((hist_count_ - 1 - params_.m) % len)];
}

std::optional<double> EnhancedUnsyncScheduler::drift_lag() const noexcept {
    if (hist_count_ <= params_.m) return std::nullopt;
    const auto len = static_cast<std::int64_t>(drift_hist_.size());
    return drift_hist_[static_cast<std::size_t>((hist_count_ - 1 - params_.m) % len)];
}

TraceActions EnhancedUnsyncScheduler::decide(std::int64_t arrivals, bool saw_dns, int active_count) noexcept {
    a_bar_ = (1.0 - params_.zeta) * a_bar_ + params_.zeta * static_cast<double>(arrivals);

    int x = argmin_direction(params_.gamma - queue_ * packets_);
    if (params_.m > 0 && x != 0) {
        const auto q_then = queue_lag();
        const auto d_then = drift_lag();
        if (!q_then) {
            x = 0;  // start-up: not enough history either way
        } else if (x > 0) {
            if (!(queue_ - *q_then > 0.0)) x = 0;
        } else {
            // A queue pinned at zero by the clamp still counts as falling when
            // service exceeded input over the window.
            if (!(queue_ - *q_then < 0.0 || drift_ - *d_then < 0.0)) x = 0;
        }
    }

    const double before = z_;
    z_ = std::clamp(z_ + x, 0.0, static_cast<double>(params_.y_max));
    TraceActions act{traces_to_start(before, z_, active_count, params_.y_max), z_};

    if (active_count == 0 && act.start_new == 0) {
        const bool dns_wake = params_.dns_trigger && saw_dns;
        const bool avg_wake = a_bar_ > params_.a_star;
        if (dns_wake || avg_wake) {
            act.start_new = 1;
            z_ = std::max(z_, 1.0);
            act.target_z = z_;
        }
    }
    return act;
}

void EnhancedUnsyncScheduler::observe(std::int64_t arrivals, std::int64_t emitted) noexcept {
    const double input = std::max(a_bar_, static_cast<double>(arrivals));
    const double delta = params_.alpha * (input - static_cast<double>(emitted));
    queue_ = std::max(0.0, queue_ + delta);
    drift_ += delta;
    if (params_.m > 0) {
        const auto len = static_cast<std::int64_t>(queue_hist_.size());
        const auto idx = static_cast<std::size_t>(hist_count_ % len);
        queue_hist_[idx] = queue_;
        drift_hist_[idx] = drift_;
        ++hist_count_;
    }
}

TraceActions EnhancedUnsyncScheduler::step(std::int64_t arrivals, std::int64_t emitted, bool saw_dns,
                                           int active_count) noexcept {
    const auto act = decide(arrivals, saw_dns, active_count);
    observe(arrivals, emitted);
    return act;
}

} // namespace traceshape
