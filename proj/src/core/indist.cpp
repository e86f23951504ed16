#include "indist.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace traceshape {

TraceSequence canonical(TraceSequence seq) {
    while (!seq.empty() && seq.back() == 0) seq.pop_back();
    return seq;
}

// --- catalog ----------------------------------------------------------------

PageCatalog PageCatalog::build(const std::vector<std::pair<std::string, TraceSequence>>& pages,
                               std::optional<std::vector<double>> q) {
    PageCatalog c;
    std::map<TraceSequence, std::size_t> seen;
    std::vector<TraceSequence> canon;
    for (const auto& [id, raw] : pages) {
        for (auto v : raw) {
            if (v < 0) throw ParamError("page '" + id + "': sequence entries must be non-negative");
        }
        auto s = canonical(raw);
        if (s.empty()) throw ParamError("page '" + id + "': sequence has no trace");
        canon.push_back(s);
        seen.emplace(std::move(s), 0);
    }
    std::size_t idx = 0;
    for (auto& [seq, i] : seen) {
        i = idx++;
        c.sequences_.push_back(seq);
    }
    c.pages_of_.resize(c.sequences_.size());
    for (std::size_t p = 0; p < pages.size(); ++p) {
        if (c.find_page(pages[p].first)) throw ParamError("duplicate page id '" + pages[p].first + "'");
        c.pages_.push_back(pages[p].first);
        const auto h = seen.at(canon[p]);
        c.page_seq_.push_back(h);
        c.pages_of_[h].push_back(p);
    }
    if (q) {
        if (q->size() != pages.size()) throw ParamError("fetch probabilities must cover every page");
        double sum = 0.0;
        for (double v : *q) {
            if (!(v >= 0.0)) throw ParamError("fetch probabilities must be non-negative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ParamError("fetch probabilities must sum to 1");
        c.q_ = std::move(q);
    }
    return c;
}

std::optional<std::size_t> PageCatalog::find_page(const std::string& id) const {
    const auto it = std::find(pages_.begin(), pages_.end(), id);
    if (it == pages_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - pages_.begin());
}

std::optional<std::size_t> PageCatalog::find_sequence(const TraceSequence& seq) const {
    const auto it = std::lower_bound(sequences_.begin(), sequences_.end(), seq);
    if (it == sequences_.end() || *it != seq) return std::nullopt;
    return static_cast<std::size_t>(it - sequences_.begin());
}

double PageCatalog::share_within(std::size_t page) const {
    const auto& members = pages_of_.at(page_seq_.at(page));
    if (!q_) return 1.0 / static_cast<double>(members.size());
    double total = 0.0;
    for (auto i : members) total += (*q_)[i];
    return total > 0.0 ? (*q_)[page] / total : 0.0;
}

std::vector<std::pair<std::string, TraceSequence>> load_sequence_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::pair<std::string, TraceSequence>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
        }
        if (cells.empty() || cells[0] == "page_id") continue;
        TraceSequence seq;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (cells[i].empty()) continue;
            std::size_t used = 0;
            long long v = 0;
            try {
                v = std::stoll(cells[i], &used);
            } catch (const std::logic_error&) {
                used = 0;
            }
            if (used != cells[i].size() || v < 0)
                throw IoError(path + ":" + std::to_string(lineno) + ": bad group count '" + cells[i] + "'");
            seq.push_back(v);
        }
        rows.emplace_back(cells[0], std::move(seq));
    }
    return rows;
}

// --- combinations -----------------------------------------------------------

int Combination::fetches() const noexcept {
    int n = 0;
    for (const auto& it : items) n += it.multiplicity;
    return n;
}

TraceSequence superpose(const Combination& c, const PageCatalog& catalog) {
    TraceSequence out;
    for (const auto& item : c.items) {
        const auto& s = catalog.sequence(item.sequence);
        for (auto o : item.offsets) {
            const auto need = static_cast<std::size_t>(o) + s.size();
            if (out.size() < need) out.resize(need, 0);
            for (std::size_t j = 0; j < s.size(); ++j) out[static_cast<std::size_t>(o) + j] += s[j];
        }
    }
    return canonical(std::move(out));
}

namespace {

struct Packer {
    const PageCatalog& catalog;
    const SearchLimits& limits;
    TraceSequence residual;
    std::vector<std::size_t> lead;  // first nonzero index per sequence
    std::vector<int> used;          // placements per sequence
    std::vector<std::pair<std::size_t, std::int64_t>> chosen;  // (sequence, offset)
    std::vector<Combination> found;
    std::uint64_t partials = 0;

    bool fits(std::size_t h, std::int64_t offset) const {
        const auto& s = catalog.sequence(h);
        if (offset + static_cast<std::int64_t>(s.size()) > static_cast<std::int64_t>(residual.size())) return false;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (residual[static_cast<std::size_t>(offset) + j] < s[j]) return false;
        }
        return true;
    }

    void apply(std::size_t h, std::int64_t offset, std::int64_t sign) {
        const auto& s = catalog.sequence(h);
        for (std::size_t j = 0; j < s.size(); ++j) residual[static_cast<std::size_t>(offset) + j] -= sign * s[j];
    }

    void record() {
        Combination c;
        for (auto [h, o] : chosen) {
            if (c.items.empty() || c.items.back().sequence != h) c.items.push_back({h, 0, {}});
            ++c.items.back().multiplicity;
            c.items.back().offsets.push_back(o);
        }
        // chosen is ordered by (position, sequence); regroup by sequence.
        std::sort(c.items.begin(), c.items.end());
        std::vector<CombinationItem> merged;
        for (auto& it : c.items) {
            if (!merged.empty() && merged.back().sequence == it.sequence) {
                merged.back().multiplicity += it.multiplicity;
                merged.back().offsets.insert(merged.back().offsets.end(), it.offsets.begin(), it.offsets.end());
            } else {
                merged.push_back(std::move(it));
            }
        }
        for (auto& it : merged) std::sort(it.offsets.begin(), it.offsets.end());
        c.items = std::move(merged);
        found.push_back(std::move(c));
    }

    // Placements are generated in nondecreasing (position, sequence) order:
    // the first still-positive position must be covered by a placement whose
    // leading trace sits exactly there.
    void search(std::size_t from, std::size_t min_seq) {
        if (++partials > limits.max_partials)
            throw BudgetError("combination search exceeded " + std::to_string(limits.max_partials) +
                              " partial solutions");
        std::size_t i = from;
        while (i < residual.size() && residual[i] == 0) ++i;
        if (i == residual.size()) {
            record();
            return;
        }
        if (static_cast<int>(chosen.size()) >= limits.max_items) return;
        const std::size_t start = (i == from) ? min_seq : 0;
        for (std::size_t h = start; h < catalog.sequence_count(); ++h) {
            if (used[h] >= limits.max_multiplicity) continue;
            const auto offset = static_cast<std::int64_t>(i) - static_cast<std::int64_t>(lead[h]);
            if (offset < 0 || !fits(h, offset)) continue;
            apply(h, offset, 1);
            ++used[h];
            chosen.emplace_back(h, offset);
            search(i, h);
            chosen.pop_back();
            --used[h];
            apply(h, offset, -1);
        }
    }
};

} // namespace

std::vector<Combination> enumerate_combinations(const TraceSequence& observed, const PageCatalog& catalog,
                                                const SearchLimits& limits) {
    if (limits.max_multiplicity < 1 || limits.max_items < 1) throw ParamError("search limits must be positive");
    for (auto v : observed) {
        if (v < 0) throw ParamError("observed sequence entries must be non-negative");
    }
    Packer p{catalog, limits, canonical(observed), {}, {}, {}, {}, 0};
    if (p.residual.empty()) throw ParamError("observed sequence has no trace");
    p.used.assign(catalog.sequence_count(), 0);
    for (std::size_t h = 0; h < catalog.sequence_count(); ++h) {
        const auto& s = catalog.sequence(h);
        p.lead.push_back(static_cast<std::size_t>(std::find_if(s.begin(), s.end(), [](auto v) { return v != 0; }) -
                                                  s.begin()));
    }
    p.search(0, 0);
    std::sort(p.found.begin(), p.found.end());
    return std::move(p.found);
}

// --- probabilities ----------------------------------------------------------

double prob_fetch_simple(std::span<const std::int64_t> observed, std::size_t page, const PageCatalog& catalog) {
    if (catalog.sequence(catalog.sequence_of(page)) != TraceSequence{1})
        throw ParamError("page '" + catalog.page(page) + "' is not served by a single trace");
    const double share = catalog.share_within(page);
    std::int64_t traces = 0;
    for (auto t : observed) {
        if (t < 0) throw ParamError("observed sequence entries must be non-negative");
        traces += t;
    }
    if (traces == 0 || share <= 0.0) return 0.0;
    if (share >= 1.0) return 1.0;
    // 1 - prod_j (1 - share)^{T_j}
    return -std::expm1(static_cast<double>(traces) * std::log1p(-share));
}

double binomial_at_least_one(int n, double p) {
    if (n <= 0 || p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double log_n_fact = std::lgamma(n + 1.0);
    double sum = 0.0;
    for (int j = 1; j <= n; ++j) {
        const double log_choose = log_n_fact - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
        sum += std::exp(log_choose + j * log_p + (n - j) * log_q);
    }
    return std::min(sum, 1.0);
}

double prob_fetch_given_combination(std::size_t page, const Combination& c, const PageCatalog& catalog) {
    const auto h = catalog.sequence_of(page);
    double total = 0.0;
    for (const auto& item : c.items) {
        if (item.sequence != h) continue;
        total += binomial_at_least_one(item.multiplicity, catalog.share_within(page));
    }
    return std::min(total, 1.0);
}

double prob_fetch_given_history(std::size_t page, std::span<const Combination> combinations, const TraceSequence& h,
                                const PageCatalog& catalog, const HistoryOptions& options) {
    const auto self = catalog.find_sequence(canonical(h));
    auto is_identity = [&](const Combination& c) {
        return self && c.items.size() == 1 && c.items[0].sequence == *self && c.items[0].multiplicity == 1;
    };
    double sum = 0.0;
    for (const auto& c : combinations) {
        // The identity still counts towards m_h, it just explains nothing.
        if (options.exclude_self && is_identity(c)) continue;
        sum += prob_fetch_given_combination(page, c, catalog);
    }
    return combinations.empty() ? 0.0 : sum / static_cast<double>(combinations.size());
}

double prob_fetch_given_history(std::size_t page, const TraceSequence& h, const PageCatalog& catalog,
                                const SearchLimits& limits, const HistoryOptions& options) {
    const auto combos = enumerate_combinations(h, catalog, limits);
    return prob_fetch_given_history(page, combos, h, catalog, options);
}

namespace {

bool packs_into(const TraceSequence& small, const TraceSequence& big) {
    if (small.size() > big.size()) return false;
    for (std::size_t o = 0; o + small.size() <= big.size(); ++o) {
        bool ok = true;
        for (std::size_t j = 0; j < small.size() && ok; ++j) ok = big[o + j] >= small[j];
        if (ok) return true;
    }
    return false;
}

} // namespace

std::vector<PageReport> deniability_report(const PageCatalog& catalog, const SearchLimits& limits,
                                           const HistoryOptions& options) {
    const std::size_t H = catalog.sequence_count();
    std::vector<std::optional<std::vector<Combination>>> combos(H);
    for (std::size_t h = 0; h < H; ++h) {
        try {
            combos[h] = enumerate_combinations(catalog.sequence(h), catalog, limits);
        } catch (const BudgetError&) {
            combos[h].reset();
        }
    }

    std::vector<PageReport> report;
    for (std::size_t page = 0; page < catalog.page_count(); ++page) {
        PageReport r;
        r.page = page;
        const auto& own = catalog.sequence(catalog.sequence_of(page));
        double sum = 0.0;
        for (std::size_t h = 0; h < H; ++h) {
            double p = 0.0;
            if (combos[h]) {
                p = prob_fetch_given_history(page, *combos[h], catalog.sequence(h), catalog, options);
            } else if (packs_into(own, catalog.sequence(h))) {
                r.budget_exceeded = true;
            }
            sum += p;
            if (!r.worst_h || p > r.worst_prob) {
                r.worst_prob = p;
                r.worst_h = h;
            }
            if (!r.best_h || p < r.best_prob) {
                r.best_prob = p;
                r.best_h = h;
            }
        }
        r.mean_prob = H == 0 ? 0.0 : sum / static_cast<double>(H);
        report.push_back(r);
    }
    std::stable_sort(report.begin(), report.end(), [&](const PageReport& a, const PageReport& b) {
        if (a.mean_prob != b.mean_prob) return a.mean_prob < b.mean_prob;
        return catalog.page(a.page) < catalog.page(b.page);
    });
    return report;
}

} // namespace traceshape
