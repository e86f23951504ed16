#include "workload.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace traceshape {

namespace {

constexpr std::int64_t kRateDenominator = 1'000'000;

// Rates are held as exact fractions so that the cbr accumulator has no
// floating drift: 2.8 pkt/slot over 1000 slots is exactly 2800 packets.
std::pair<std::int64_t, std::int64_t> to_fraction(double rate) {
    const auto num = static_cast<std::int64_t>(std::llround(rate * static_cast<double>(kRateDenominator)));
    const auto g = std::gcd(num, kRateDenominator);
    if (g == 0) return {0, 1};
    return {num / g, kRateDenominator / g};
}

std::int64_t floor_mul(std::int64_t k, std::int64_t num, std::int64_t den) {
    return (k * num) / den;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

bool parse_bool_cell(const std::string& s) {
    if (s == "1" || s == "true" || s == "TRUE" || s == "True") return true;
    if (s == "0" || s == "false" || s == "FALSE" || s == "False" || s.empty()) return false;
    throw IoError("bad is_dns value '" + s + "'");
}

} // namespace

const char* to_string(WorkloadKind kind) noexcept {
    switch (kind) {
    case WorkloadKind::cbr: return "cbr";
    case WorkloadKind::poisson: return "poisson";
    case WorkloadKind::onoff_fetch: return "onoff-fetch";
    case WorkloadKind::replay: return "replay";
    }
    return "?";
}

std::optional<WorkloadKind> parse_workload_kind(std::string_view s) noexcept {
    if (s == "cbr") return WorkloadKind::cbr;
    if (s == "poisson") return WorkloadKind::poisson;
    if (s == "onoff-fetch" || s == "onoff_fetch") return WorkloadKind::onoff_fetch;
    if (s == "replay") return WorkloadKind::replay;
    return std::nullopt;
}

std::vector<ReplayRow> load_replay_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open replay file '" + path + "'");
    std::vector<ReplayRow> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(trim(cell));
        if (lineno == 1 && !cells.empty() && cells[0] == "slot") continue;
        if (cells.size() < 2 || cells.size() > 3)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected slot,user[,is_dns]");
        try {
            ReplayRow r;
            r.slot = std::stoll(cells[0]);
            r.user = std::stoi(cells[1]);
            r.is_dns = cells.size() == 3 && parse_bool_cell(cells[2]);
            if (r.slot < 0 || r.user < 1) throw IoError("slot must be >= 0 and user >= 1");
            rows.push_back(r);
        } catch (const std::logic_error&) {
            throw IoError(path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ReplayRow& a, const ReplayRow& b) {
        return a.slot != b.slot ? a.slot < b.slot : a.user < b.user;
    });
    return rows;
}

ArrivalGenerator::ArrivalGenerator(const WorkloadSpec& spec, std::uint64_t seed)
    : ArrivalGenerator(spec, seed,
                       spec.kind == WorkloadKind::replay ? load_replay_csv(spec.replay_path)
                                                         : std::vector<ReplayRow>{}) {}

ArrivalGenerator::ArrivalGenerator(const WorkloadSpec& spec, std::uint64_t seed, std::vector<ReplayRow> replay)
    : spec_(spec), replay_(std::move(replay)) {
    if (spec_.n_users < 1) throw ParamError("workload.n_users must be >= 1");
    if (spec_.rate < 0.0 || spec_.step_rate < 0.0) throw ParamError("workload rates must be non-negative");
    std::tie(num_, den_) = to_fraction(spec_.rate);
    std::tie(step_num_, step_den_) = to_fraction(spec_.step_rate);

    flows_.resize(static_cast<std::size_t>(spec_.n_users));
    for (int u = 0; u < spec_.n_users; ++u) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(u + 1)};
        flows_[static_cast<std::size_t>(u)].rng.seed(seq);
    }
    if (spec_.kind == WorkloadKind::onoff_fetch) {
        const auto& p = spec_.onoff;
        if (p.peak_rate <= 0.0 || p.burst_median <= 0.0 || p.burst_sigma < 0.0 || p.think_mean_slots < 0.0)
            throw ParamError("workload.onoff parameters out of range");
        // Random initial phase keeps independent flows from starting in lockstep.
        for (auto& f : flows_) {
            std::exponential_distribution<double> think(1.0 / std::max(p.think_mean_slots, 1e-9));
            f.think_left = static_cast<Slot>(think(f.rng));
        }
    }
}

double ArrivalGenerator::rate_for(Slot k) const noexcept {
    return (spec_.step_slot && k >= *spec_.step_slot) ? spec_.step_rate : spec_.rate;
}

std::int64_t ArrivalGenerator::cbr_count(Slot k) const noexcept {
    if (spec_.step_slot && k >= *spec_.step_slot) {
        const Slot j = k - *spec_.step_slot;
        return floor_mul(j + 1, step_num_, step_den_) - floor_mul(j, step_num_, step_den_);
    }
    return floor_mul(k + 1, num_, den_) - floor_mul(k, num_, den_);
}

std::int64_t ArrivalGenerator::onoff_count(Flow& f, bool& dns) {
    const auto& p = spec_.onoff;
    if (f.burst_left == 0) {
        if (f.think_left > 0) {
            --f.think_left;
            return 0;
        }
        std::lognormal_distribution<double> size(std::log(p.burst_median), p.burst_sigma);
        f.burst_left = std::max<std::int64_t>(1, std::llround(size(f.rng)));
        f.burst_emitted = 0;
        f.burst_slot = 0;
        f.dns_pending = true;
    }
    const auto due = static_cast<std::int64_t>(std::floor(static_cast<double>(f.burst_slot + 1) * p.peak_rate));
    ++f.burst_slot;
    const std::int64_t count = std::min(due - f.burst_emitted, f.burst_left);
    f.burst_emitted += count;
    f.burst_left -= count;
    if (f.burst_left == 0) {
        std::exponential_distribution<double> think(1.0 / std::max(p.think_mean_slots, 1e-9));
        f.think_left = static_cast<Slot>(think(f.rng));
    }
    // The DNS mark rides on the first packet of the burst, which may land a
    // few slots in when peak_rate < 1.
    dns = f.dns_pending && count > 0;
    if (dns) f.dns_pending = false;
    return count;
}

void ArrivalGenerator::push(std::vector<PacketRecord>& out, int user, Slot k, std::int64_t count,
                            bool first_is_dns) {
    for (std::int64_t i = 0; i < count; ++i) {
        out.push_back(PacketRecord{next_id_++, user, k, first_is_dns && i == 0, std::nullopt});
    }
}

void ArrivalGenerator::arrivals_at(Slot k, std::vector<PacketRecord>& out) {
    if (k != next_slot_)
        throw ParamError("arrivals must be requested slot by slot; expected " + std::to_string(next_slot_) +
                         ", got " + std::to_string(k));
    ++next_slot_;

    switch (spec_.kind) {
    case WorkloadKind::cbr: {
        const auto c = cbr_count(k);
        for (int u = 1; u <= spec_.n_users; ++u) push(out, u, k, c, false);
        break;
    }
    case WorkloadKind::poisson: {
        const double r = rate_for(k);
        for (int u = 1; u <= spec_.n_users; ++u) {
            if (r <= 0.0) continue;
            std::poisson_distribution<std::int64_t> d(r);
            push(out, u, k, d(flows_[static_cast<std::size_t>(u - 1)].rng), false);
        }
        break;
    }
    case WorkloadKind::onoff_fetch: {
        for (int u = 1; u <= spec_.n_users; ++u) {
            bool dns = false;
            const auto c = onoff_count(flows_[static_cast<std::size_t>(u - 1)], dns);
            push(out, u, k, c, dns);
        }
        break;
    }
    case WorkloadKind::replay: {
        while (replay_pos_ < replay_.size() && replay_[replay_pos_].slot < k) ++replay_pos_;
        while (replay_pos_ < replay_.size() && replay_[replay_pos_].slot == k) {
            const auto& r = replay_[replay_pos_++];
            push(out, r.user, k, 1, r.is_dns);
        }
        break;
    }
    }
}

std::vector<PacketRecord> ArrivalGenerator::arrivals_at(Slot k) {
    std::vector<PacketRecord> out;
    arrivals_at(k, out);
    return out;
}

} // namespace traceshape
