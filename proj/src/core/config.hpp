#pragma once

#include "engine.hpp"
#include "indist.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace traceshape {

inline constexpr int kSchemaVersion = 1;

// Dotted keys accepted by set_config_key, in echo order.
const std::vector<std::string>& config_keys();

// Sets one dotted key from its textual value. Throws ConfigError (with
// `line` attached) for unknown keys or unparsable values.
void set_config_key(SimConfig& config, std::string_view key, std::string_view value, int line = 0);
std::string get_config_key(const SimConfig& config, std::string_view key);

// Applies "key=value".
void apply_override(SimConfig& config, std::string_view assignment);

// Canonical YAML text of a configuration. Loading it back yields an equal
// SimConfig.
std::string echo_config(const SimConfig& config);

// Accepts YAML text, or CSV text whose leading '# ' comment block is an echo.
SimConfig parse_config_text(const std::string& text);
SimConfig load_config(const std::string& path);

struct Experiment {
    enum class Kind { simulate, sweep, analyze };

    std::string name;
    Kind kind = Kind::simulate;
    SimConfig config;
    // simulate
    bool series = false;
    // sweep
    SweepAxis axis = SweepAxis::gamma;
    std::vector<double> values;
    int seeds = 5;
    // analyze
    std::string catalog;
    std::string observed;
    SearchLimits limits;
    bool exclude_self = false;
};

struct ExperimentFile {
    int schema_version = kSchemaVersion;
    std::string out_dir = ".";
    SimConfig base;
    std::vector<Experiment> experiments;
};

ExperimentFile parse_experiment_text(const std::string& text);
ExperimentFile load_experiment_file(const std::string& path);

std::string read_text_file(const std::string& path);

} // namespace traceshape
