#pragma once

#include "config.hpp"
#include "engine.hpp"
#include "indist.hpp"

#include <ostream>
#include <string>

namespace traceshape {

// Every CSV starts with the configuration echo as '# ' comment lines,
// followed by a mandatory header row. Column orders are fixed.

void write_summary_csv(std::ostream& out, const SimConfig& config, const Metrics& m);
// slot,arrivals,emitted,dummies,active_traces,Q
void write_series_csv(std::ostream& out, const SimConfig& config, const Metrics& m);
// group_index,traces_started
void write_trace_sequence_csv(std::ostream& out, const SimConfig& config, const Metrics& m);
void write_sweep_csv(std::ostream& out, const SimConfig& base, SweepAxis axis, int seeds,
                     const std::vector<SweepPoint>& points);

struct AnalysisRequest {
    std::string catalog_path;
    std::string observed_path;  // empty: per-page report over the whole catalog
    SearchLimits limits;
    HistoryOptions options;
};

struct AnalysisOutcome {
    std::size_t rows = 0;
    std::size_t flagged = 0;  // rows whose value is incomplete because of the search budget
};

// Reads the catalog (and observations), writes the report CSV.
AnalysisOutcome run_analysis(const AnalysisRequest& request, std::ostream& out);

// Observed sequences: either catalog-style rows or the engine's
// group_index,traces_started export (a single sequence named by the file).
std::vector<std::pair<std::string, TraceSequence>> load_observations(const std::string& path);

void write_file(const std::string& path, const std::string& contents);

} // namespace traceshape
