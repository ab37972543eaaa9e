#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "swa/parallel.hpp"
#include "swa/rng.hpp"

using namespace swa;

TEST(Substream, DeterministicAndKeyed) {
    EXPECT_EQ(substream(42, "trial", {3}), substream(42, "trial", {3}));
    EXPECT_NE(substream(42, "trial", {3}), substream(42, "trial", {4}));
    EXPECT_NE(substream(42, "trial", {3}), substream(43, "trial", {3}));
    EXPECT_NE(substream(42, "trial", {3}), substream(42, "other", {3}));
    EXPECT_NE(substream(42, {1, 2}), substream(42, {2, 1}));
}

TEST(UniformBelow, StaysInRangeAndCoversIt) {
    Rng rng = make_rng(7);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto v = uniform_below(rng, 7);
        ASSERT_LT(v, 7u);
        ++hits[v];
    }
    for (int h : hits) EXPECT_NEAR(h, 10000, 500);
}

TEST(UniformOpen01, NeverHitsEndpoints) {
    Rng rng = make_rng(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = uniform_open01(rng);
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(NormalSource, MomentsMatchStandardNormal) {
    Rng rng = make_rng(11);
    NormalSource normal;
    const int n = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double z = normal(rng);
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.015);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    for (std::size_t workers : {1u, 2u, 8u}) {
        std::vector<std::atomic<int>> seen(1000);
        parallel_for(seen.size(), workers, [&](std::size_t i) { seen[i].fetch_add(1); });
        for (auto& s : seen) EXPECT_EQ(s.load(), 1);
    }
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
    for (std::size_t workers : {1u, 4u}) {
        try {
            parallel_for(100, workers, [](std::size_t i) {
                if (i == 37 || i == 80) throw std::runtime_error(std::to_string(i));
            });
            FAIL() << "expected an exception";
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "37");
        }
    }
}

TEST(ParallelFor, ZeroCountIsNoop) {
    int calls = 0;
    parallel_for(0, 4, [&](std::size_t) { ++calls; });
    EXPECT_EQ(calls, 0);
}
