#include "errors.hpp"
#include "trace.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace traceshape;

namespace {

ActiveTrace at(const Trace& t, Slot start, std::uint64_t id = 0) {
    return ActiveTrace{std::make_shared<const Trace>(t), start, id};
}

} // namespace

TEST(Trace, UniformExactDivision) {
    const auto t = Trace::uniform(4, 8);
    EXPECT_EQ(std::vector<std::int64_t>(t.emissions().begin(), t.emissions().end()),
              (std::vector<std::int64_t>{2, 2, 2, 2}));
    EXPECT_EQ(t.packets(), 8);
}

TEST(Trace, UniformSinglePacketLandsLast) {
    const auto t = Trace::uniform(5, 1);
    EXPECT_EQ(std::vector<std::int64_t>(t.emissions().begin(), t.emissions().end()),
              (std::vector<std::int64_t>{0, 0, 0, 0, 1}));
}

TEST(Trace, DefaultTraceIsZeroOne) {
    const auto t = Trace::uniform(9615, 1682);
    std::int64_t sum = 0;
    for (auto p : t.emissions()) {
        EXPECT_TRUE(p == 0 || p == 1);
        sum += p;
    }
    EXPECT_EQ(sum, 1682);
    EXPECT_EQ(t.max_emission(), 1);
}

TEST(Trace, RejectsDegenerateInputs) {
    EXPECT_THROW(Trace::uniform(0, 1), ParamError);
    EXPECT_THROW(Trace::uniform(5, 0), ParamError);
    EXPECT_THROW(Trace(std::vector<std::int64_t>{}), ParamError);
    EXPECT_THROW(Trace(std::vector<std::int64_t>{0, 0}), ParamError);
    EXPECT_THROW(Trace(std::vector<std::int64_t>{1, -1, 1}), ParamError);
}

TEST(Trace, EmissionAtHalfOpenWindow) {
    const auto a = at(Trace::uniform(4, 8), 10);
    EXPECT_EQ(emission_at(a, 9), 0);
    EXPECT_EQ(emission_at(a, 10), 2);
    EXPECT_EQ(emission_at(a, 11), 2);
    EXPECT_EQ(emission_at(a, 13), 2);
    EXPECT_EQ(emission_at(a, 14), 0);
    EXPECT_EQ(emission_at(at(Trace::uniform(5, 1), 0), 4), 1);
}

TEST(Trace, RequiredEmission) {
    const Trace ones(std::vector<std::int64_t>{1, 1});
    std::vector<ActiveTrace> two{at(ones, 0, 1), at(ones, 0, 2)};
    EXPECT_EQ(required_emission(two, 0), 2);
    EXPECT_EQ(required_emission(std::span<const ActiveTrace>{}, 7), 0);

    const auto four = Trace::uniform(4, 8);
    std::vector<ActiveTrace> overlap{at(four, 0, 1), at(four, 2, 2)};
    EXPECT_EQ(required_emission(overlap, 2), 4);
    EXPECT_EQ(required_emission(overlap, 1), 2);
    EXPECT_EQ(required_emission(overlap, 5), 2);
}

// Prefix counts stay within one packet of the ideal line j*P/n.
TEST(TraceProperty, AccumulatorSpread) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const std::int64_t n = std::uniform_int_distribution<std::int64_t>(1, 400)(rng);
        const std::int64_t P = std::uniform_int_distribution<std::int64_t>(1, 1200)(rng);
        const auto t = Trace::uniform(n, P);
        ASSERT_EQ(t.slots(), n);
        std::int64_t prefix = 0;
        const auto e = t.emissions();
        for (std::int64_t j = 1; j <= n; ++j) {
            prefix += e[static_cast<std::size_t>(j - 1)];
            const double ideal = static_cast<double>(j) * static_cast<double>(P) / static_cast<double>(n);
            ASSERT_LT(std::fabs(static_cast<double>(prefix) - ideal), 1.0) << "n=" << n << " P=" << P;
            ASSERT_TRUE(e[static_cast<std::size_t>(j - 1)] == P / n || e[static_cast<std::size_t>(j - 1)] == P / n + 1);
        }
        ASSERT_EQ(prefix, P);
        ASSERT_EQ(Trace::uniform(n, P), t);
    }
}

TEST(TraceProperty, WindowConservesPackets) {
    for (std::int64_t n : {1, 3, 17, 100}) {
        for (std::int64_t P : {1, 5, 99, 250}) {
            const auto a = at(Trace::uniform(n, P), 42);
            std::int64_t total = 0;
            for (Slot k = 0; k < 42 + n + 10; ++k) total += emission_at(a, k);
            EXPECT_EQ(total, P);
        }
    }
}

// Sum over a set equals the sum over singletons, checked per trace.
TEST(TraceProperty, OverlapLinearity) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ActiveTrace> set;
        const int count = std::uniform_int_distribution<int>(0, 8)(rng);
        for (int i = 0; i < count; ++i) {
            const auto n = std::uniform_int_distribution<std::int64_t>(1, 30)(rng);
            const auto P = std::uniform_int_distribution<std::int64_t>(1, 60)(rng);
            set.push_back(at(Trace::uniform(n, P), std::uniform_int_distribution<Slot>(0, 40)(rng),
                             static_cast<std::uint64_t>(i)));
        }
        for (Slot k = 0; k < 90; ++k) {
            std::int64_t singles = 0;
            for (const auto& a : set) {
                const auto off = k - a.start_slot;
                if (off >= 0 && off < a.trace->slots()) singles += a.trace->emissions()[static_cast<std::size_t>(off)];
            }
            ASSERT_EQ(required_emission(set, k), singles);
        }
    }
}
