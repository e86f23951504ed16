#include "outputs.hpp"

#include "errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace traceshape {

namespace {

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

void echo(std::ostream& out, const std::string& text) {
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out << "# " << line << '\n';
}

std::string join(const TraceSequence& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(s[i]);
    }
    return out;
}

// RFC-4180 quoting for free-text cells.
std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

const char* kEchoKeys[] = {"workload.kind", "workload.rate", "workload.n_users", "scheduler.kind",
                           "scheduler.gamma", "scheduler.alpha", "scheduler.y_max", "scheduler.zeta",
                           "scheduler.a_star", "scheduler.m", "trace.n", "trace.P", "link.c",
                           "sim.duration_slots", "sim.seed"};

} // namespace

void write_summary_csv(std::ostream& out, const SimConfig& config, const Metrics& m) {
    echo(out, echo_config(config));
    for (const char* k : kEchoKeys) out << k << ',';
    out << "arrivals,served,dummies,emitted,backlog,traces_started,dummy_fraction,"
           "delay_mean_ms,delay_p50_ms,delay_p95_ms,final_queue\n";
    for (const char* k : kEchoKeys) out << cell(get_config_key(config, k)) << ',';
    out << m.arrivals << ',' << m.served << ',' << m.dummies << ',' << m.emitted << ',' << m.backlog << ','
        << m.traces_started << ',' << num(m.dummy_fraction) << ',' << num(m.delay_mean_ms) << ','
        << num(m.delay_p50_ms) << ',' << num(m.delay_p95_ms) << ',' << num(m.final_queue) << '\n';
}

void write_series_csv(std::ostream& out, const SimConfig& config, const Metrics& m) {
    echo(out, echo_config(config));
    out << "slot,arrivals,emitted,dummies,active_traces,Q\n";
    for (std::size_t k = 0; k < m.series.size(); ++k) {
        const auto& s = m.series[k];
        out << k << ',' << s.arrivals << ',' << s.emitted << ',' << s.dummies << ',' << s.active_traces << ','
            << num(s.queue) << '\n';
    }
}

void write_trace_sequence_csv(std::ostream& out, const SimConfig& config, const Metrics& m) {
    echo(out, echo_config(config));
    out << "group_index,traces_started\n";
    for (std::size_t g = 0; g < m.trace_sequence.size(); ++g) out << g << ',' << m.trace_sequence[g] << '\n';
}

void write_sweep_csv(std::ostream& out, const SimConfig& base, SweepAxis axis, int seeds,
                     const std::vector<SweepPoint>& points) {
    echo(out, echo_config(base));
    out << "# sweep.axis: " << to_string(axis) << "\n# sweep.seeds: " << seeds << '\n';
    out << "axis,value,runs,failed,dummy_q1,dummy_median,dummy_q3,delay_mean_q1,delay_mean_median,"
           "delay_mean_q3,delay_p95_median,served_ratio_median,error\n";
    for (const auto& p : points) {
        out << to_string(axis) << ',' << num(p.value) << ',' << p.runs << ',' << p.failed << ','
            << num(p.dummy_fraction.q1) << ',' << num(p.dummy_fraction.median) << ',' << num(p.dummy_fraction.q3)
            << ',' << num(p.delay_mean_ms.q1) << ',' << num(p.delay_mean_ms.median) << ','
            << num(p.delay_mean_ms.q3) << ',' << num(p.delay_p95_ms.median) << ','
            << num(p.served_ratio.median) << ',' << cell(p.error) << '\n';
    }
}

std::vector<std::pair<std::string, TraceSequence>> load_observations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("group_index", 0) != 0) return load_sequence_rows(path);
        break;
    }
    // engine export
    TraceSequence seq;
    int lineno = 0;
    in.clear();
    in.seekg(0);
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || line.rfind("group_index", 0) == 0) continue;
        long long g = 0, t = 0;
        char comma = 0;
        std::istringstream ss(line);
        if (!(ss >> g >> comma >> t) || comma != ',' || g < 0 || t < 0)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected group_index,traces_started");
        if (static_cast<std::size_t>(g) >= seq.size()) seq.resize(static_cast<std::size_t>(g) + 1, 0);
        seq[static_cast<std::size_t>(g)] = t;
    }
    return {{path, seq}};
}

AnalysisOutcome run_analysis(const AnalysisRequest& req, std::ostream& out) {
    const auto catalog = PageCatalog::build(load_sequence_rows(req.catalog_path));
    AnalysisOutcome outcome;

    out << "# analyze.catalog: " << req.catalog_path << '\n';
    if (!req.observed_path.empty()) out << "# analyze.observed: " << req.observed_path << '\n';
    out << "# analyze.max_multiplicity: " << req.limits.max_multiplicity << '\n'
        << "# analyze.max_items: " << req.limits.max_items << '\n'
        << "# analyze.max_partials: " << req.limits.max_partials << '\n'
        << "# analyze.exclude_self: " << (req.options.exclude_self ? "true" : "false") << '\n';

    if (req.observed_path.empty()) {
        const auto report = deniability_report(catalog, req.limits, req.options);
        out << "rank,page_id,sequence,anonymity_set,mean_prob,worst_prob,worst_sequence,min_prob,min_sequence,"
               "budget_exceeded\n";
        std::size_t rank = 0;
        for (const auto& r : report) {
            const auto h = catalog.sequence_of(r.page);
            out << ++rank << ',' << cell(catalog.page(r.page)) << ',' << join(catalog.sequence(h)) << ','
                << catalog.pages_of(h).size() << ',' << num(r.mean_prob) << ',' << num(r.worst_prob) << ','
                << (r.worst_h ? join(catalog.sequence(*r.worst_h)) : "") << ',' << num(r.best_prob) << ','
                << (r.best_h ? join(catalog.sequence(*r.best_h)) : "") << ',' << (r.budget_exceeded ? 1 : 0)
                << '\n';
            ++outcome.rows;
            if (r.budget_exceeded) ++outcome.flagged;
        }
        return outcome;
    }

    const auto observations = load_observations(req.observed_path);
    out << "observed_id,page_id,prob_given_observed,prob_simple,combinations,budget_exceeded\n";
    for (const auto& [id, raw] : observations) {
        const auto seq = canonical(raw);
        if (seq.empty()) continue;
        std::optional<std::vector<Combination>> combos;
        try {
            combos = enumerate_combinations(seq, catalog, req.limits);
        } catch (const BudgetError&) {
            combos.reset();
        }
        for (std::size_t page = 0; page < catalog.page_count(); ++page) {
            out << cell(id) << ',' << cell(catalog.page(page)) << ',';
            if (combos) out << num(prob_fetch_given_history(page, *combos, seq, catalog, req.options));
            out << ',';
            if (catalog.sequence(catalog.sequence_of(page)) == TraceSequence{1})
                out << num(prob_fetch_simple(seq, page, catalog));
            out << ',' << (combos ? std::to_string(combos->size()) : std::string{}) << ',' << (combos ? 0 : 1)
                << '\n';
            ++outcome.rows;
            if (!combos) ++outcome.flagged;
        }
    }
    return outcome;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << contents;
    if (!f) throw IoError("write failed for '" + path + "'");
}

} // namespace traceshape
