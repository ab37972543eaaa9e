#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "support.hpp"
#include "swa/errors.hpp"
#include "swa/prescreen.hpp"
#include "swa/simlab.hpp"

using namespace swa;

namespace {

double naive_r(const Dataset& d, Index j) {
    const Index n = d.n();
    double mx = 0, my = 0;
    for (Index i = 0; i < n; ++i) {
        mx += d.x()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        my += d.y()(static_cast<Eigen::Index>(i));
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (Index i = 0; i < n; ++i) {
        const double a = d.x()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - mx;
        const double b = d.y()(static_cast<Eigen::Index>(i)) - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

TEST(ScreenTopK, KeepAllIsPermutation) {
    const Dataset d = test::gaussian(30, 12, {1.0, 0.5}, 1.0, 1);
    auto kept = screen_top_k(d, 12, 1).kept;
    std::sort(kept.begin(), kept.end());
    std::vector<Index> all(12);
    std::iota(all.begin(), all.end(), Index{0});
    EXPECT_EQ(kept, all);
    EXPECT_THROW(screen_top_k(d, 0), ConfigError);
    EXPECT_THROW(screen_top_k(d, 13), ConfigError);
}

TEST(ScreenTopK, PerfectCorrelationRanksFirst) {
    const Dataset base = test::gaussian(25, 8, {}, 1.0, 2);
    const Dataset d(base.x(), base.x().col(3));
    const auto r = screen_top_k(d, 3, 1);
    EXPECT_EQ(r.kept.front(), 3u);
    EXPECT_NEAR(std::abs(r.correlations[3]), 1.0, 1e-15);
}

TEST(ScreenTopK, OrderedByAbsoluteCorrelationAndNested) {
    const Dataset d = test::gaussian(40, 30, {2.0, -3.0, 0.5, 0.0, 1.0}, 1.0, 3);
    const auto full = screen_top_k(d, 30, 2);
    for (std::size_t i = 1; i < full.kept.size(); ++i)
        EXPECT_GE(std::abs(full.correlations[full.kept[i - 1]]), std::abs(full.correlations[full.kept[i]]));
    for (Index k1 = 1; k1 <= 30; ++k1)
        for (Index k2 = k1; k2 <= 30; k2 += 5) {
            auto a = screen_top_k(d, k1, 1).kept, b = screen_top_k(d, k2, 1).kept;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        }
}

TEST(ScreenTopK, MatchesTwoPassOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dataset base = test::gaussian(50, 15, {1.0, 2.0}, 1.0, seed);
        const Dataset d((base.x().array() * 3.0 + 1e3).matrix(), (base.y().array() - 50.0).matrix());
        const auto r = screen_top_k(d, 15, 3);
        for (Index j = 0; j < 15; ++j) EXPECT_NEAR(r.correlations[j], naive_r(d, j), 1e-12);
    }
}

TEST(ScreenTopK, ConstantColumnRecordedAndRankedLast) {
    Dataset base = test::gaussian(20, 5, {1.0}, 1.0, 6);
    Eigen::MatrixXd x = base.x();
    x.col(2).setConstant(4.0);
    const Dataset d(x, base.y());
    const auto r = screen_top_k(d, 5, 1);
    EXPECT_EQ(r.constant_columns, std::vector<Index>{2});
    EXPECT_EQ(r.correlations[2], 0.0);
    EXPECT_EQ(r.kept.back(), 2u);
}

TEST(ScreenThreshold, KeepsColumnsAtOrAboveCutoff) {
    // Columns built to have correlations 0.1, 0.25 and 0.5 with y.
    const Index n = 200;
    Eigen::VectorXd y(n), z1(n), z2(n), z3(n);
    const Dataset noise = test::gaussian(n, 4, {}, 1.0, 8);
    y = noise.x().col(0);
    Eigen::MatrixXd x(n, 3);
    const double rs[3] = {0.1, 0.25, 0.5};
    for (int j = 0; j < 3; ++j) {
        // Orthogonalise the helper against y and itself scale it so cor = rs[j] exactly.
        Eigen::VectorXd e = noise.x().col(j + 1);
        const Eigen::VectorXd yc = (y.array() - y.mean()).matrix();
        e = (e.array() - e.mean()).matrix();
        e -= (e.dot(yc) / yc.squaredNorm()) * yc;
        x.col(j) = rs[j] * yc / yc.norm() + std::sqrt(1 - rs[j] * rs[j]) * e / e.norm();
    }
    const Dataset d(x, y);
    const auto r = screen_threshold(d, 0.20, 1);
    EXPECT_NEAR(r.correlations[0], 0.1, 1e-12);
    EXPECT_EQ(r.kept, (std::vector<Index>{2, 1}));
}

TEST(ScreenThreshold, EmptyAboveMaxAndIdempotent) {
    const Dataset d = test::gaussian(60, 40, {1.0, 0.8, 0.4}, 1.0, 9);
    const auto all = screen_threshold(d, 0.01, 1);
    double max_r = 0;
    for (double v : all.correlations) max_r = std::max(max_r, std::abs(v));
    EXPECT_TRUE(screen_threshold(d, std::nextafter(max_r, 1.0), 1).kept.empty());

    const auto once = screen_threshold(d, 0.15, 1);
    const Dataset reduced = reduce(d, once);
    const auto twice = screen_threshold(reduced, 0.15, 1);
    EXPECT_EQ(twice.kept.size(), reduced.p());
    for (Index j = 0; j < reduced.p(); ++j) EXPECT_EQ(reduced.source_index(j), once.kept[j]);
    EXPECT_THROW(screen_threshold(d, 0.0), ConfigError);
    EXPECT_THROW(screen_threshold(d, 1.0), ConfigError);
}

// With p = 1000 and n = 80 the null |r| cutoff for the top 100 sits near 0.18,
// while a coefficient b gives r close to b / sqrt(77). Only b >= 3 clears it reliably.
TEST(ScreenTopK, UltraHighDesignKeepsStrongFeatures) {
    const auto spec = sim::make_example2(1000);
    int good = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto r = screen_top_k(sim::draw(spec, seed), 100, 1);
        bool all = true;
        for (Index j = 6; j < 10; ++j) all = all && std::find(r.kept.begin(), r.kept.end(), j) != r.kept.end();
        good += all;
    }
    EXPECT_GE(good, 170);
}
