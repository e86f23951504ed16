#include "errors.hpp"
#include "workload.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace traceshape;

namespace {

std::vector<std::int64_t> counts(ArrivalGenerator& g, Slot slots) {
    std::vector<std::int64_t> c;
    for (Slot k = 0; k < slots; ++k) c.push_back(static_cast<std::int64_t>(g.arrivals_at(k).size()));
    return c;
}

WorkloadSpec spec(WorkloadKind kind, double rate, int users = 1) {
    WorkloadSpec s;
    s.kind = kind;
    s.rate = rate;
    s.n_users = users;
    return s;
}

} // namespace

TEST(Workload, KindNames) {
    for (auto k : {WorkloadKind::cbr, WorkloadKind::poisson, WorkloadKind::onoff_fetch, WorkloadKind::replay})
        EXPECT_EQ(parse_workload_kind(to_string(k)), k);
    EXPECT_EQ(parse_workload_kind("onoff-fetch"), WorkloadKind::onoff_fetch);
    EXPECT_FALSE(parse_workload_kind("bursty"));
}

TEST(Workload, CbrHalfRate) {
    ArrivalGenerator g(spec(WorkloadKind::cbr, 0.5), 1);
    EXPECT_EQ(counts(g, 4), (std::vector<std::int64_t>{0, 1, 0, 1}));
}

TEST(Workload, CbrTotalIsExact) {
    ArrivalGenerator g(spec(WorkloadKind::cbr, 2.8), 1);
    std::int64_t total = 0;
    for (auto c : counts(g, 1000)) total += c;
    EXPECT_EQ(total, 2800);
}

TEST(Workload, CbrStepChangesRate) {
    auto s = spec(WorkloadKind::cbr, 1.0);
    s.step_slot = 10;
    s.step_rate = 3.0;
    ArrivalGenerator g(s, 1);
    const auto c = counts(g, 20);
    std::int64_t before = 0, after = 0;
    for (int k = 0; k < 10; ++k) before += c[static_cast<std::size_t>(k)];
    for (int k = 10; k < 20; ++k) after += c[static_cast<std::size_t>(k)];
    EXPECT_EQ(before, 10);
    EXPECT_EQ(after, 30);
}

TEST(Workload, PerUserOrderingAndIds) {
    ArrivalGenerator g(spec(WorkloadKind::cbr, 1.0, 3), 1);
    std::uint64_t expected_id = 0;
    for (Slot k = 0; k < 5; ++k) {
        const auto a = g.arrivals_at(k);
        ASSERT_EQ(a.size(), 3u);
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].user, static_cast<int>(i) + 1);
            EXPECT_EQ(a[i].arrival_slot, k);
            EXPECT_EQ(a[i].id, expected_id++);
        }
    }
}

TEST(Workload, PoissonDeterministic) {
    ArrivalGenerator a(spec(WorkloadKind::poisson, 1.0, 2), 99);
    ArrivalGenerator b(spec(WorkloadKind::poisson, 1.0, 2), 99);
    ArrivalGenerator c(spec(WorkloadKind::poisson, 1.0, 2), 100);
    const auto ca = counts(a, 2000);
    EXPECT_EQ(ca, counts(b, 2000));
    EXPECT_NE(ca, counts(c, 2000));
}

TEST(Workload, PoissonLongRunRate) {
    ArrivalGenerator g(spec(WorkloadKind::poisson, 1.0), 5);
    std::int64_t total = 0;
    const Slot slots = 1'000'000;
    for (Slot k = 0; k < slots; ++k) total += static_cast<std::int64_t>(g.arrivals_at(k).size());
    EXPECT_NEAR(static_cast<double>(total) / static_cast<double>(slots), 1.0, 0.01);
}

TEST(Workload, OnOffOneDnsPerBurst) {
    auto s = spec(WorkloadKind::onoff_fetch, 0.0, 2);
    s.onoff.burst_median = 50;
    s.onoff.think_mean_slots = 200;
    s.onoff.peak_rate = 1.0;
    ArrivalGenerator g(s, 3);
    // With peak rate 1 per user, a burst is a run of consecutive slots and
    // every run starts with exactly one DNS packet.
    std::vector<Slot> last(3, -2);
    std::int64_t dns = 0, bursts = 0;
    for (Slot k = 0; k < 200'000; ++k) {
        for (const auto& p : g.arrivals_at(k)) {
            const bool new_run = last[static_cast<std::size_t>(p.user)] != k - 1;
            if (p.is_dns) ++dns;
            if (new_run) {
                ++bursts;
                EXPECT_TRUE(p.is_dns) << "slot " << k;
            }
            last[static_cast<std::size_t>(p.user)] = k;
        }
    }
    EXPECT_GT(bursts, 100);
    // Back-to-back bursts merge into one run, so DNS count may exceed runs.
    EXPECT_GE(dns, bursts);
}

TEST(Workload, OnOffMeanRateMatchesParameters) {
    auto s = spec(WorkloadKind::onoff_fetch, 0.0, 1);
    s.onoff.burst_median = 100;
    s.onoff.burst_sigma = 0.5;
    s.onoff.think_mean_slots = 400;
    s.onoff.peak_rate = 1.0;
    ArrivalGenerator g(s, 8);
    std::int64_t total = 0;
    const Slot slots = 2'000'000;
    for (Slot k = 0; k < slots; ++k) total += static_cast<std::int64_t>(g.arrivals_at(k).size());
    // Burst mean of a log-normal: median * exp(sigma^2 / 2).
    const double burst = 100.0 * std::exp(0.125);
    const double expected = burst / (burst + 400.0);
    EXPECT_NEAR(static_cast<double>(total) / static_cast<double>(slots), expected, 0.02 * expected + 0.005);
}

TEST(Workload, SequentialSlotsOnly) {
    ArrivalGenerator g(spec(WorkloadKind::cbr, 1.0), 1);
    g.arrivals_at(0);
    EXPECT_THROW(g.arrivals_at(2), ParamError);
}

TEST(Workload, RejectsBadSpec) {
    EXPECT_THROW(ArrivalGenerator(spec(WorkloadKind::cbr, -1.0), 1), ParamError);
    EXPECT_THROW(ArrivalGenerator(spec(WorkloadKind::cbr, 1.0, 0), 1), ParamError);
}

TEST(Workload, ReplayCsv) {
    const auto path = (std::filesystem::temp_directory_path() / "traceshape_replay_test.csv").string();
    {
        std::ofstream f(path);
        f << "slot,user,is_dns\n3,2,0\n1,1,1\n3,1,0\n";
    }
    const auto rows = load_replay_csv(path);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], (ReplayRow{1, 1, true}));
    EXPECT_EQ(rows[1], (ReplayRow{3, 1, false}));

    ArrivalGenerator g(spec(WorkloadKind::replay, 0.0, 2), 1, rows);
    EXPECT_TRUE(g.arrivals_at(0).empty());
    const auto s1 = g.arrivals_at(1);
    ASSERT_EQ(s1.size(), 1u);
    EXPECT_TRUE(s1[0].is_dns);
    EXPECT_TRUE(g.arrivals_at(2).empty());
    const auto s3 = g.arrivals_at(3);
    ASSERT_EQ(s3.size(), 2u);
    EXPECT_EQ(s3[0].user, 1);
    EXPECT_EQ(s3[1].user, 2);
    std::remove(path.c_str());

    EXPECT_THROW(load_replay_csv("/nonexistent/replay.csv"), IoError);
}
