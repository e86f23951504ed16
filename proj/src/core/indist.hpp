#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace traceshape {

// Traces started per group; canonical form has no trailing zeros.
using TraceSequence = std::vector<std::int64_t>;

TraceSequence canonical(TraceSequence seq);

// Pages grouped by the sequence they generate. Sequences are stored once,
// in lexicographic order, so indices are stable for a given page set.
class PageCatalog {
public:
    // `q`, when given, holds one fetch probability per page and must sum to 1.
    static PageCatalog build(const std::vector<std::pair<std::string, TraceSequence>>& pages,
                             std::optional<std::vector<double>> q = std::nullopt);

    std::size_t page_count() const noexcept { return pages_.size(); }
    std::size_t sequence_count() const noexcept { return sequences_.size(); }
    const std::string& page(std::size_t i) const { return pages_.at(i); }
    const TraceSequence& sequence(std::size_t h) const { return sequences_.at(h); }
    std::size_t sequence_of(std::size_t page) const { return page_seq_.at(page); }
    // W_h
    const std::vector<std::size_t>& pages_of(std::size_t h) const { return pages_of_.at(h); }
    std::optional<std::size_t> find_page(const std::string& id) const;
    std::optional<std::size_t> find_sequence(const TraceSequence& seq) const;

    // Probability that a fetch generating sequence h was page `page`:
    // q_page / sum_{i in W_h} q_i, or 1/|W_h| without q.
    double share_within(std::size_t page) const;

private:
    std::vector<std::string> pages_;
    std::vector<TraceSequence> sequences_;
    std::vector<std::size_t> page_seq_;
    std::vector<std::vector<std::size_t>> pages_of_;
    std::optional<std::vector<double>> q_;
};

// Reads rows of (page_id, group_0, group_1, ...). An optional header row
// starting with "page_id" and '#' comment lines are skipped.
std::vector<std::pair<std::string, TraceSequence>> load_sequence_rows(const std::string& path);

struct CombinationItem {
    std::size_t sequence = 0;          // index into the catalog
    int multiplicity = 0;
    std::vector<std::int64_t> offsets;  // group offsets, sorted, one per fetch

    friend auto operator<=>(const CombinationItem&, const CombinationItem&) = default;
};

struct Combination {
    std::vector<CombinationItem> items;  // sorted by sequence index

    int fetches() const noexcept;
    friend auto operator<=>(const Combination&, const Combination&) = default;
};

// Offset-shifted elementwise sum of every placement, trimmed to canonical form.
TraceSequence superpose(const Combination& c, const PageCatalog& catalog);

struct SearchLimits {
    int max_multiplicity = 4;  // placements of any one sequence
    int max_items = 6;         // placements in total
    std::uint64_t max_partials = 10'000'000;
};

// Every multiset of sequence placements whose superposition is `observed`,
// ordered lexicographically. Throws BudgetError past max_partials.
std::vector<Combination> enumerate_combinations(const TraceSequence& observed, const PageCatalog& catalog,
                                                const SearchLimits& limits);

// P(X_w = 1 | T) for a page covered by a single trace.
// Throws ParamError if the page's sequence is not [1].
double prob_fetch_simple(std::span<const std::int64_t> observed, std::size_t page, const PageCatalog& catalog);

// sum_{j=1..n} C(n,j) p^j (1-p)^(n-j), evaluated term by term in log space.
double binomial_at_least_one(int n, double p);

double prob_fetch_given_combination(std::size_t page, const Combination& c, const PageCatalog& catalog);

struct HistoryOptions {
    // Give the single-fetch identity combination {(h,1)@0} zero weight while
    // keeping it in the m_h normalization.
    bool exclude_self = false;
};

// Mean of prob_fetch_given_combination over the combinations of h.
double prob_fetch_given_history(std::size_t page, const TraceSequence& h, const PageCatalog& catalog,
                                const SearchLimits& limits, const HistoryOptions& options = {});
double prob_fetch_given_history(std::size_t page, std::span<const Combination> combinations,
                                const TraceSequence& h, const PageCatalog& catalog,
                                const HistoryOptions& options = {});

struct PageReport {
    std::size_t page = 0;
    double mean_prob = 0.0;
    double worst_prob = 0.0;  // max over h
    std::optional<std::size_t> worst_h;
    double best_prob = 0.0;   // min over h
    std::optional<std::size_t> best_h;
    bool budget_exceeded = false;
};

// Per-page deniability over all catalog sequences taken as equally likely
// observations; sorted ascending by mean_prob (ties by page id). Sequences
// whose enumeration exceeds the budget contribute 0 and flag every page
// whose own sequence could have been packed into them.
std::vector<PageReport> deniability_report(const PageCatalog& catalog, const SearchLimits& limits,
                                           const HistoryOptions& options = {});

} // namespace traceshape
