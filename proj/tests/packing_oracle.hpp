#pragma once

// Exhaustive reference for combination enumeration. Tries every count for
// every (sequence, offset) placement, independently of the library search.

#include "indist.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using traceshape::Combination;
using traceshape::CombinationItem;
using traceshape::PageCatalog;
using traceshape::SearchLimits;
using traceshape::TraceSequence;

inline std::vector<Combination> brute_force_combinations(const TraceSequence& observed, const PageCatalog& catalog,
                                                         const SearchLimits& limits) {
    struct Placement {
        std::size_t seq;
        std::size_t offset;
    };
    std::vector<Placement> placements;
    for (std::size_t h = 0; h < catalog.sequence_count(); ++h) {
        const auto& s = catalog.sequence(h);
        for (std::size_t o = 0; o + s.size() <= observed.size(); ++o) placements.push_back({h, o});
    }

    std::set<Combination> found;
    std::vector<int> count(placements.size(), 0);
    std::vector<std::int64_t> sum(observed.size(), 0);

    auto record = [&] {
        std::map<std::size_t, CombinationItem> items;
        for (std::size_t i = 0; i < placements.size(); ++i) {
            for (int r = 0; r < count[i]; ++r) {
                auto& it = items[placements[i].seq];
                it.sequence = placements[i].seq;
                ++it.multiplicity;
                it.offsets.push_back(static_cast<std::int64_t>(placements[i].offset));
            }
        }
        Combination c;
        for (auto& [h, it] : items) {
            std::sort(it.offsets.begin(), it.offsets.end());
            c.items.push_back(it);
        }
        found.insert(c);
    };

    std::vector<int> per_seq(catalog.sequence_count(), 0);
    auto rec = [&](auto&& self, std::size_t i, int items) -> void {
        if (i == placements.size()) {
            if (items > 0 && sum == observed) record();
            return;
        }
        const auto [h, off] = placements[i];
        const auto& s = catalog.sequence(h);
        self(self, i + 1, items);
        int added = 0;
        while (items + added < limits.max_items && per_seq[h] < limits.max_multiplicity) {
            bool fits = true;
            for (std::size_t j = 0; j < s.size(); ++j) {
                sum[off + j] += s[j];
                fits = fits && sum[off + j] <= observed[off + j];
            }
            ++added;
            ++per_seq[h];
            if (!fits) break;
            count[i] = added;
            self(self, i + 1, items + added);
        }
        for (std::size_t j = 0; j < s.size(); ++j) sum[off + j] -= s[j] * added;
        per_seq[h] -= added;
        count[i] = 0;
    };
    rec(rec, 0, 0);
    return {found.begin(), found.end()};
}

} // namespace oracle
