#include "trace.hpp"

#include "errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace traceshape {

Trace::Trace(std::vector<std::int64_t> emissions) : emissions_(std::move(emissions)) {
    if (emissions_.empty()) throw ParamError("trace must span at least one slot");
    for (auto p : emissions_) {
        if (p < 0) throw ParamError("trace emissions must be non-negative");
    }
    packets_ = std::accumulate(emissions_.begin(), emissions_.end(), std::int64_t{0});
    if (packets_ < 1) throw ParamError("trace must carry at least one packet");
    max_emission_ = *std::max_element(emissions_.begin(), emissions_.end());
}

Trace Trace::uniform(std::int64_t slots, std::int64_t packets) {
    if (slots < 1) throw ParamError("trace.n must be >= 1, got " + std::to_string(slots));
    if (packets < 1) throw ParamError("trace.P must be >= 1, got " + std::to_string(packets));
    std::vector<std::int64_t> e(static_cast<std::size_t>(slots));
    // Integer accumulator; the products stay far below 2^63 for any sane trace.
    std::int64_t prev = 0;
    for (std::int64_t j = 1; j <= slots; ++j) {
        const std::int64_t cur = (j * packets) / slots;
        e[static_cast<std::size_t>(j - 1)] = cur - prev;
        prev = cur;
    }
    return Trace(std::move(e));
}

std::int64_t emission_at(const ActiveTrace& active, Slot k) noexcept {
    if (!active.active_at(k)) return 0;
    return active.trace->emissions()[static_cast<std::size_t>(k - active.start_slot)];
}

std::int64_t required_emission(std::span<const ActiveTrace> actives, Slot k) noexcept {
    std::int64_t total = 0;
    for (const auto& a : actives) total += emission_at(a, k);
    return total;
}

} // namespace traceshape
