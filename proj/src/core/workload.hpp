#pragma once

#include "trace.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace traceshape {

struct PacketRecord {
    std::uint64_t id = 0;
    int user = 1;  // 1-based
    Slot arrival_slot = 0;
    bool is_dns = false;
    std::optional<Slot> departure_slot;

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

enum class WorkloadKind { cbr, poisson, onoff_fetch, replay };

const char* to_string(WorkloadKind kind) noexcept;
std::optional<WorkloadKind> parse_workload_kind(std::string_view s) noexcept;

// On/off web-fetch flow: think ~ exponential, then a burst whose size is
// log-normal (median, sigma of the underlying normal) arriving at peak_rate.
struct OnOffParams {
    double burst_median = 1000.0;
    double burst_sigma = 0.8;
    double think_mean_slots = 2700.0;
    double peak_rate = 1.0;

    friend bool operator==(const OnOffParams&, const OnOffParams&) = default;
};

struct ReplayRow {
    Slot slot = 0;
    int user = 1;
    bool is_dns = false;

    friend bool operator==(const ReplayRow&, const ReplayRow&) = default;
};

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::cbr;
    double rate = 2.8;  // packets per slot per user (cbr, poisson)
    // Optional rate change: from step_slot on, each user runs at step_rate.
    std::optional<Slot> step_slot;
    double step_rate = 0.0;
    int n_users = 1;
    OnOffParams onoff;
    std::string replay_path;

    friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

// Reads (slot, user, is_dns) rows. A header row is optional.
std::vector<ReplayRow> load_replay_csv(const std::string& path);

// Deterministic per-slot arrival process. Slots must be requested in
// strictly increasing order starting at 0.
class ArrivalGenerator {
public:
    ArrivalGenerator(const WorkloadSpec& spec, std::uint64_t seed);
    ArrivalGenerator(const WorkloadSpec& spec, std::uint64_t seed, std::vector<ReplayRow> replay);

    // Appends the arrivals of slot k to `out`, ordered by user.
    void arrivals_at(Slot k, std::vector<PacketRecord>& out);
    std::vector<PacketRecord> arrivals_at(Slot k);

    const WorkloadSpec& spec() const noexcept { return spec_; }

private:
    struct Flow {
        std::mt19937_64 rng;
        Slot think_left = 0;
        std::int64_t burst_left = 0;
        std::int64_t burst_emitted = 0;
        Slot burst_slot = 0;  // slots elapsed inside the current burst
        bool dns_pending = false;
    };

    double rate_for(Slot k) const noexcept;
    std::int64_t cbr_count(Slot k) const noexcept;
    std::int64_t onoff_count(Flow& flow, bool& dns);
    void push(std::vector<PacketRecord>& out, int user, Slot k, std::int64_t count, bool first_is_dns);

    WorkloadSpec spec_;
    std::vector<Flow> flows_;
    std::vector<ReplayRow> replay_;
    std::size_t replay_pos_ = 0;
    std::uint64_t next_id_ = 0;
    Slot next_slot_ = 0;
    // cbr rates as exact fractions num/den
    std::int64_t num_ = 0, den_ = 1, step_num_ = 0, step_den_ = 1;
};

} // namespace traceshape
