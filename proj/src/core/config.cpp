#include "config.hpp"

#include "errors.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace traceshape {

namespace {

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

double parse_double(std::string_view key, std::string_view s, int line) {
    if (s == "inf" || s == ".inf" || s == "+inf" || s == "infinity" || s == ".Inf" || s == ".INF")
        return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || std::isnan(v))
        throw ConfigError(std::string(key), line, "expected a number, got '" + std::string(s) + "'");
    return v;
}

std::int64_t parse_int(std::string_view key, std::string_view s, int line) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError(std::string(key), line, "expected an integer, got '" + std::string(s) + "'");
    return v;
}

int parse_small_int(std::string_view key, std::string_view s, int line) {
    const auto v = parse_int(key, s, line);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(std::string(key), line, "integer out of range");
    return static_cast<int>(v);
}

bool parse_bool(std::string_view key, std::string_view s, int line) {
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ConfigError(std::string(key), line, "expected true/false, got '" + std::string(s) + "'");
}

bool is_null(std::string_view s) { return s.empty() || s == "~" || s == "null" || s == "none"; }

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

struct KeySpec {
    std::function<void(SimConfig&, std::string_view, int)> set;
    std::function<std::string(const SimConfig&)> get;
};

using Table = std::vector<std::pair<std::string, KeySpec>>;

#define TS_DOUBLE(key, field)                                                                       \
    {key, {[](SimConfig& c, std::string_view v, int l) { c.field = parse_double(key, v, l); },      \
           [](const SimConfig& c) { return fmt_double(c.field); }}}
#define TS_INT(key, field)                                                                          \
    {key, {[](SimConfig& c, std::string_view v, int l) { c.field = parse_small_int(key, v, l); },   \
           [](const SimConfig& c) { return std::to_string(c.field); }}}
#define TS_INT64(key, field)                                                                        \
    {key, {[](SimConfig& c, std::string_view v, int l) { c.field = parse_int(key, v, l); },         \
           [](const SimConfig& c) { return std::to_string(c.field); }}}

const Table& table() {
    static const Table t = {
        {"workload.kind",
         {[](SimConfig& c, std::string_view v, int l) {
              auto k = parse_workload_kind(v);
              if (!k)
                  throw ConfigError("workload.kind", l,
                                    "unknown kind '" + std::string(v) + "' (cbr, poisson, onoff-fetch, replay)");
              c.workload.kind = *k;
          },
          [](const SimConfig& c) { return std::string(to_string(c.workload.kind)); }}},
        TS_DOUBLE("workload.rate", workload.rate),
        TS_INT("workload.n_users", workload.n_users),
        {"workload.step_slot",
         {[](SimConfig& c, std::string_view v, int l) {
              if (is_null(v))
                  c.workload.step_slot.reset();
              else
                  c.workload.step_slot = parse_int("workload.step_slot", v, l);
          },
          [](const SimConfig& c) {
              return c.workload.step_slot ? std::to_string(*c.workload.step_slot) : std::string("~");
          }}},
        TS_DOUBLE("workload.step_rate", workload.step_rate),
        TS_DOUBLE("workload.burst_median", workload.onoff.burst_median),
        TS_DOUBLE("workload.burst_sigma", workload.onoff.burst_sigma),
        TS_DOUBLE("workload.think_mean_slots", workload.onoff.think_mean_slots),
        TS_DOUBLE("workload.peak_rate", workload.onoff.peak_rate),
        {"workload.replay_path",
         {[](SimConfig& c, std::string_view v, int) { c.workload.replay_path = std::string(v); },
          [](const SimConfig& c) { return quote(c.workload.replay_path); }}},
        {"scheduler.kind",
         {[](SimConfig& c, std::string_view v, int l) {
              auto k = parse_scheduler_kind(v);
              if (!k)
                  throw ConfigError(
                      "scheduler.kind", l,
                      "unknown kind '" + std::string(v) + "' (sync_bangbang, sync_incremental, unsync, enhanced)");
              c.scheduler_kind = *k;
          },
          [](const SimConfig& c) { return std::string(to_string(c.scheduler_kind)); }}},
        TS_DOUBLE("scheduler.gamma", params.gamma),
        TS_DOUBLE("scheduler.alpha", params.alpha),
        TS_INT("scheduler.y_max", params.y_max),
        TS_DOUBLE("scheduler.zeta", params.zeta),
        TS_DOUBLE("scheduler.a_star", params.a_star),
        TS_INT("scheduler.m", params.m),
        {"scheduler.dns_trigger",
         {[](SimConfig& c, std::string_view v, int l) { c.params.dns_trigger = parse_bool("scheduler.dns_trigger", v, l); },
          [](const SimConfig& c) { return std::string(c.params.dns_trigger ? "true" : "false"); }}},
        TS_INT64("trace.n", trace_n),
        TS_INT64("trace.P", trace_P),
        TS_INT("link.c", params.c),
        TS_INT64("sim.duration_slots", duration_slots),
        {"sim.seed",
         {[](SimConfig& c, std::string_view v, int l) {
              std::uint64_t s = 0;
              const auto* end = v.data() + v.size();
              auto [ptr, ec] = std::from_chars(v.data(), end, s);
              if (ec != std::errc{} || ptr != end)
                  throw ConfigError("sim.seed", l, "expected an unsigned integer, got '" + std::string(v) + "'");
              c.seed = s;
          },
          [](const SimConfig& c) { return std::to_string(c.seed); }}},
        TS_DOUBLE("sim.slot_duration_ms", slot_duration_ms),
    };
    return t;
}

#undef TS_DOUBLE
#undef TS_INT
#undef TS_INT64

const KeySpec* find_key(std::string_view key) {
    for (const auto& [k, spec] : table()) {
        if (k == key) return &spec;
    }
    return nullptr;
}

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

std::string scalar_text(const YAML::Node& n, const std::string& key) {
    if (n.IsNull()) return "~";
    if (!n.IsScalar()) throw ConfigError(key, line_of(n), "expected a scalar value");
    return n.Scalar();
}

const std::vector<std::string> kSections = {"workload", "scheduler", "trace", "link", "sim"};

bool is_section(const std::string& s) {
    return std::find(kSections.begin(), kSections.end(), s) != kSections.end();
}

// Applies one "section: {key: value}" block.
void apply_section(SimConfig& c, const std::string& section, const YAML::Node& node) {
    if (!node.IsMap()) throw ConfigError(section, line_of(node), "expected a mapping");
    for (const auto& kv : node) {
        const auto name = kv.first.as<std::string>();
        const auto key = section + "." + name;
        const auto* spec = find_key(key);
        if (!spec) throw ConfigError(key, line_of(kv.first), "unknown key");
        spec->set(c, scalar_text(kv.second, key), line_of(kv.second));
    }
}

YAML::Node parse_yaml(const std::string& text) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.mark.line + 1, e.msg);
    }
}

// A CSV produced by this tool carries its configuration as a leading block
// of "# " lines; strip the prefix so the block parses as YAML.
std::string strip_echo(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    bool any = false;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            out += line.substr(2) + "\n";
            any = true;
        } else if (line == "#") {
            out += "\n";
        } else {
            break;
        }
    }
    return any ? out : text;
}

void check_schema(const YAML::Node& root) {
    const auto v = root["schema_version"];
    if (!v) throw ConfigError("schema_version", 0, "missing");
    const auto text = scalar_text(v, "schema_version");
    if (parse_int("schema_version", text, line_of(v)) != kSchemaVersion)
        throw ConfigError("schema_version", line_of(v),
                          "unsupported version " + text + " (this build reads " + std::to_string(kSchemaVersion) + ")");
}

} // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, spec] : table()) k.push_back(name);
        return k;
    }();
    return keys;
}

void set_config_key(SimConfig& config, std::string_view key, std::string_view value, int line) {
    const auto* spec = find_key(key);
    if (!spec) throw ConfigError(std::string(key), line, "unknown key");
    spec->set(config, value, line);
}

std::string get_config_key(const SimConfig& config, std::string_view key) {
    const auto* spec = find_key(key);
    if (!spec) throw ConfigError(std::string(key), 0, "unknown key");
    return spec->get(config);
}

void apply_override(SimConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(std::string(assignment), 0, "override must look like key=value");
    set_config_key(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string echo_config(const SimConfig& config) {
    std::string out = "schema_version: " + std::to_string(kSchemaVersion) + "\n";
    std::string section;
    for (const auto& [key, spec] : table()) {
        const auto dot = key.find('.');
        const auto sec = key.substr(0, dot);
        if (sec != section) {
            out += sec + ":\n";
            section = sec;
        }
        out += "  " + key.substr(dot + 1) + ": " + spec.get(config) + "\n";
    }
    return out;
}

SimConfig parse_config_text(const std::string& text) {
    const auto root = parse_yaml(strip_echo(text));
    if (!root.IsMap()) throw ConfigError("", 0, "configuration must be a mapping");
    check_schema(root);
    SimConfig c;
    for (const auto& kv : root) {
        const auto name = kv.first.as<std::string>();
        if (name == "schema_version" || name == "out_dir") continue;
        if (name == "experiments") throw ConfigError(name, line_of(kv.first), "experiment files are run with 'run'");
        if (!is_section(name)) throw ConfigError(name, line_of(kv.first), "unknown key");
        apply_section(c, name, kv.second);
    }
    return c;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SimConfig load_config(const std::string& path) { return parse_config_text(read_text_file(path)); }

ExperimentFile parse_experiment_text(const std::string& text) {
    const auto root = parse_yaml(text);
    if (!root.IsMap()) throw ConfigError("", 0, "experiment file must be a mapping");
    check_schema(root);

    ExperimentFile f;
    YAML::Node experiments;
    for (const auto& kv : root) {
        const auto name = kv.first.as<std::string>();
        if (name == "schema_version") continue;
        if (name == "out_dir") {
            f.out_dir = scalar_text(kv.second, name);
        } else if (name == "experiments") {
            experiments = kv.second;
        } else if (is_section(name)) {
            apply_section(f.base, name, kv.second);
        } else {
            throw ConfigError(name, line_of(kv.first), "unknown key");
        }
    }
    if (!experiments || !experiments.IsMap() || experiments.size() == 0)
        throw ConfigError("experiments", experiments ? line_of(experiments) : 0, "at least one named experiment required");

    for (const auto& ex : experiments) {
        Experiment e;
        e.name = ex.first.as<std::string>();
        e.config = f.base;
        const auto& body = ex.second;
        const auto where = "experiments." + e.name;
        if (!body.IsMap()) throw ConfigError(where, line_of(body), "expected a mapping");
        int jobs = 0;
        for (const auto& kv : body) {
            const auto key = kv.first.as<std::string>();
            const auto path = where + "." + key;
            if (is_section(key)) {
                apply_section(e.config, key, kv.second);
            } else if (key == "simulate") {
                ++jobs;
                e.kind = Experiment::Kind::simulate;
                if (kv.second.IsMap()) {
                    for (const auto& o : kv.second) {
                        const auto ok = o.first.as<std::string>();
                        if (ok != "series") throw ConfigError(path + "." + ok, line_of(o.first), "unknown key");
                        e.series = parse_bool(path + ".series", scalar_text(o.second, ok), line_of(o.second));
                    }
                }
            } else if (key == "sweep") {
                ++jobs;
                e.kind = Experiment::Kind::sweep;
                if (!kv.second.IsMap()) throw ConfigError(path, line_of(kv.second), "expected a mapping");
                for (const auto& o : kv.second) {
                    const auto ok = o.first.as<std::string>();
                    const auto okey = path + "." + ok;
                    if (ok == "axis") {
                        const auto a = parse_sweep_axis(scalar_text(o.second, okey));
                        if (!a) throw ConfigError(okey, line_of(o.second), "unknown axis");
                        e.axis = *a;
                    } else if (ok == "values") {
                        if (!o.second.IsSequence()) throw ConfigError(okey, line_of(o.second), "expected a list");
                        for (const auto& v : o.second) e.values.push_back(parse_double(okey, scalar_text(v, okey), line_of(v)));
                    } else if (ok == "seeds") {
                        e.seeds = parse_small_int(okey, scalar_text(o.second, okey), line_of(o.second));
                    } else {
                        throw ConfigError(okey, line_of(o.first), "unknown key");
                    }
                }
                if (e.values.empty()) throw ConfigError(path + ".values", line_of(kv.second), "must not be empty");
                if (e.seeds < 1) throw ConfigError(path + ".seeds", line_of(kv.second), "must be >= 1");
            } else if (key == "analyze") {
                ++jobs;
                e.kind = Experiment::Kind::analyze;
                if (!kv.second.IsMap()) throw ConfigError(path, line_of(kv.second), "expected a mapping");
                for (const auto& o : kv.second) {
                    const auto ok = o.first.as<std::string>();
                    const auto okey = path + "." + ok;
                    const auto val = scalar_text(o.second, okey);
                    const int l = line_of(o.second);
                    if (ok == "catalog") e.catalog = val;
                    else if (ok == "observed") e.observed = val;
                    else if (ok == "max_multiplicity") e.limits.max_multiplicity = parse_small_int(okey, val, l);
                    else if (ok == "max_items") e.limits.max_items = parse_small_int(okey, val, l);
                    else if (ok == "max_partials") e.limits.max_partials = static_cast<std::uint64_t>(parse_int(okey, val, l));
                    else if (ok == "exclude_self") e.exclude_self = parse_bool(okey, val, l);
                    else throw ConfigError(okey, line_of(o.first), "unknown key");
                }
                if (e.catalog.empty()) throw ConfigError(path + ".catalog", line_of(kv.second), "required");
            } else {
                throw ConfigError(path, line_of(kv.first), "unknown key");
            }
        }
        if (jobs != 1) throw ConfigError(where, line_of(body), "needs exactly one of simulate, sweep, analyze");
        f.experiments.push_back(std::move(e));
    }
    return f;
}

// Relative paths inside an experiment file are relative to the file.
ExperimentFile load_experiment_file(const std::string& path) {
    auto f = parse_experiment_text(read_text_file(path));
    const auto dir = std::filesystem::path(path).parent_path();
    const auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) p = (dir / p).lexically_normal().string();
    };
    resolve(f.out_dir);
    for (auto& e : f.experiments) {
        resolve(e.catalog);
        resolve(e.observed);
        resolve(e.config.workload.replay_path);
    }
    return f;
}

} // namespace traceshape
