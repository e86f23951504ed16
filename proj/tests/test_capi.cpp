// Exercises the shared library through its C header only.
#include <traceshape/traceshape.h>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Config {
    ts_config* cfg = nullptr;
    Config() { EXPECT_EQ(ts_config_new(&cfg), TS_OK); }
    ~Config() { ts_config_free(cfg); }
    void set(const char* k, const char* v) { ASSERT_EQ(ts_config_set(cfg, k, v), TS_OK) << ts_last_error(); }
};

} // namespace

TEST(CApi, VersionAndDefaults) {
    EXPECT_STRNE(ts_version(), "");
    Config c;
    char buf[64];
    size_t needed = 0;
    ASSERT_EQ(ts_config_get(c.cfg, "trace.n", buf, sizeof buf, &needed), TS_OK);
    EXPECT_STREQ(buf, "9615");
    EXPECT_EQ(needed, 4u);
    EXPECT_EQ(ts_config_validate(c.cfg), TS_OK);

    ASSERT_EQ(ts_config_echo(c.cfg, nullptr, 0, &needed), TS_OK);
    std::vector<char> echo(needed + 1);
    ASSERT_EQ(ts_config_echo(c.cfg, echo.data(), echo.size(), &needed), TS_OK);
    EXPECT_NE(std::string(echo.data()).find("schema_version: 1"), std::string::npos);
}

TEST(CApi, ErrorsCarryKeyAndCode) {
    Config c;
    EXPECT_EQ(ts_config_set(c.cfg, "scheduler.bogus", "1"), TS_ERR_CONFIG);
    EXPECT_STREQ(ts_last_error_key(), "scheduler.bogus");
    c.set("scheduler.y_max", "30");
    EXPECT_EQ(ts_config_validate(c.cfg), TS_ERR_CONFIG);
    EXPECT_STREQ(ts_last_error_key(), "scheduler.y_max");
    EXPECT_NE(std::string(ts_last_error()).find("capacity constraint"), std::string::npos);
    ts_result* r = nullptr;
    EXPECT_EQ(ts_simulate(c.cfg, 0, &r), TS_ERR_CONFIG);
    EXPECT_EQ(r, nullptr);
    EXPECT_EQ(ts_simulate(nullptr, 0, &r), TS_ERR_ARGUMENT);
    ts_config* missing = nullptr;
    EXPECT_EQ(ts_config_load("/nonexistent/cfg.yaml", &missing), TS_ERR_IO);
}

TEST(CApi, SimulateAndExport) {
    Config c;
    c.set("sim.duration_slots", "96150");
    c.set("workload.kind", "poisson");
    ts_result* r = nullptr;
    ASSERT_EQ(ts_simulate(c.cfg, 0, &r), TS_OK) << ts_last_error();
    ts_summary s{};
    ASSERT_EQ(ts_result_summary(r, &s), TS_OK);
    EXPECT_EQ(s.emitted, s.served + s.dummies);
    EXPECT_EQ(s.arrivals, s.served + s.backlog);
    EXPECT_EQ(s.groups, 10);

    size_t len = 0;
    ASSERT_EQ(ts_result_trace_sequence(r, nullptr, 0, &len), TS_OK);
    EXPECT_EQ(len, 10u);
    std::vector<int64_t> seq(len);
    ASSERT_EQ(ts_result_trace_sequence(r, seq.data(), seq.size(), &len), TS_OK);
    int64_t total = 0;
    for (auto v : seq) total += v;
    EXPECT_EQ(static_cast<uint64_t>(total), s.traces_started);

    const auto dir = temp_dir("traceshape_capi");
    EXPECT_EQ(ts_result_write_series(r, (dir / "series.csv").c_str()), TS_ERR_ARGUMENT);
    ASSERT_EQ(ts_result_write_summary(r, (dir / "summary.csv").c_str()), TS_OK);
    EXPECT_EQ(ts_result_write_summary(r, "/nonexistent/dir/summary.csv"), TS_ERR_IO);
    ts_result_free(r);

    // The echo at the top of the CSV reloads as the same configuration.
    ts_config* back = nullptr;
    ASSERT_EQ(ts_config_load((dir / "summary.csv").c_str(), &back), TS_OK) << ts_last_error();
    char buf[32];
    ASSERT_EQ(ts_config_get(back, "workload.kind", buf, sizeof buf, nullptr), TS_OK);
    EXPECT_STREQ(buf, "poisson");
    ts_config_free(back);
    std::filesystem::remove_all(dir);
}

TEST(CApi, SweepAndStep) {
    Config c;
    c.set("sim.duration_slots", "19230");
    const auto dir = temp_dir("traceshape_capi_sweep");
    const double values[] = {512, 2048};
    int failed = -1;
    ASSERT_EQ(ts_sweep(c.cfg, "gamma", values, 2, 2, (dir / "sweep.csv").c_str(), &failed), TS_OK);
    EXPECT_EQ(failed, 0);
    EXPECT_NE(slurp(dir / "sweep.csv").find("\ngamma,2048,2,0,"), std::string::npos);
    EXPECT_EQ(ts_sweep(c.cfg, "colour", values, 2, 2, (dir / "x.csv").c_str(), nullptr), TS_ERR_ARGUMENT);
    EXPECT_EQ(ts_sweep(c.cfg, "gamma", values, 0, 2, (dir / "x.csv").c_str(), nullptr), TS_ERR_ARGUMENT);

    int64_t up = 0, down = 0;
    c.set("sim.duration_slots", "96150");
    ASSERT_EQ(ts_step_response(c.cfg, 30000, 0.5, 3.0, &up, &down), TS_OK) << ts_last_error();
    EXPECT_GE(up, 0);
    std::filesystem::remove_all(dir);
}

TEST(CApi, AnalyzeAndBudget) {
    const auto dir = temp_dir("traceshape_capi_an");
    {
        std::ofstream f(dir / "catalog.csv");
        f << "page_id,g0,g1,g2,g3\ns,1,0,0,0\nd,1,1,0,0\nw,2,0,0,0\nbig,3,3,3,3\n";
    }
    ts_analyze_options opt;
    ts_analyze_options_init(&opt);
    size_t flagged = 99;
    ASSERT_EQ(ts_analyze((dir / "catalog.csv").c_str(), nullptr, &opt, (dir / "a.csv").c_str(), &flagged), TS_OK)
        << ts_last_error();
    EXPECT_EQ(flagged, 0u);

    opt.max_multiplicity = 16;
    opt.max_items = 16;
    opt.max_partials = 30;
    EXPECT_EQ(ts_analyze((dir / "catalog.csv").c_str(), nullptr, &opt, (dir / "b.csv").c_str(), &flagged),
              TS_ERR_BUDGET);
    EXPECT_EQ(flagged, 4u);
    EXPECT_TRUE(std::filesystem::exists(dir / "b.csv"));
    EXPECT_EQ(ts_analyze((dir / "none.csv").c_str(), nullptr, &opt, (dir / "c.csv").c_str(), nullptr), TS_ERR_IO);
    std::filesystem::remove_all(dir);
}

TEST(CApi, RunExperiments) {
    const auto dir = temp_dir("traceshape_capi_run");
    {
        std::ofstream f(dir / "catalog.csv");
        f << "page_id,g0,g1\nA,1,0\nB,1,1\n";
    }
    {
        std::ofstream f(dir / "exp.yaml");
        f << "schema_version: 1\nout_dir: out\nsim:\n  duration_slots: 19230\n"
             "experiments:\n  one:\n    simulate:\n      series: true\n"
             "  pages:\n    analyze:\n      catalog: catalog.csv\n";
    }
    ASSERT_EQ(ts_run_experiments((dir / "exp.yaml").c_str(), nullptr, -1), TS_OK) << ts_last_error();
    for (const char* f : {"one_summary.csv", "one_series.csv", "one_trace_sequence.csv", "pages_analysis.csv"})
        EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
    const auto first = slurp(dir / "out" / "one_summary.csv");
    ASSERT_EQ(ts_run_experiments((dir / "exp.yaml").c_str(), nullptr, -1), TS_OK);
    EXPECT_EQ(slurp(dir / "out" / "one_summary.csv"), first);
    std::filesystem::remove_all(dir);
}
