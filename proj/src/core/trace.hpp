#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace traceshape {

using Slot = std::int64_t;

// A fixed transmission pattern: emissions()[j] packets leave at offset j
// after the trace starts. Immutable once built.
class Trace {
public:
    // Explicit (possibly non-uniform) pattern. Requires at least one slot and
    // at least one packet in total.
    explicit Trace(std::vector<std::int64_t> emissions);

    // Spreads `packets` over `slots` with the floor accumulator
    // p_j = floor(j*P/n) - floor((j-1)*P/n), j = 1..n.
    static Trace uniform(std::int64_t slots, std::int64_t packets);

    std::int64_t slots() const noexcept { return static_cast<std::int64_t>(emissions_.size()); }
    std::int64_t packets() const noexcept { return packets_; }
    std::int64_t max_emission() const noexcept { return max_emission_; }
    std::span<const std::int64_t> emissions() const noexcept { return emissions_; }

    // Nominal rate P/n in packets per slot.
    double rate() const noexcept { return static_cast<double>(packets_) / static_cast<double>(slots()); }

    friend bool operator==(const Trace&, const Trace&) = default;

private:
    std::vector<std::int64_t> emissions_;
    std::int64_t packets_ = 0;
    std::int64_t max_emission_ = 0;
};

struct ActiveTrace {
    std::shared_ptr<const Trace> trace;
    Slot start_slot = 0;
    std::uint64_t id = 0;

    // Half-open window [start, start + n).
    bool active_at(Slot k) const noexcept {
        return k >= start_slot && k < start_slot + trace->slots();
    }
    Slot end_slot() const noexcept { return start_slot + trace->slots(); }
};

// Packets the instance must emit at slot k; 0 outside its window.
std::int64_t emission_at(const ActiveTrace& active, Slot k) noexcept;

// Sum of emission_at over every instance.
std::int64_t required_emission(std::span<const ActiveTrace> actives, Slot k) noexcept;

} // namespace traceshape
