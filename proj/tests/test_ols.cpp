#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "support.hpp"
#include "swa/errors.hpp"
#include "swa/ols.hpp"
#include "swa/simlab.hpp"
#include "swa/stats.hpp"

using namespace swa;

TEST(OlsFit, ExactFitSingleColumn) {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    Eigen::VectorXd y(3);
    y << 1, 2, 3;
    const Dataset d(x, y);
    const std::vector<Index> cols{0};
    const OlsFit f = fit(d, cols);
    ASSERT_EQ(f.coefficients.size(), 1u);
    EXPECT_NEAR(f.coefficients[0], 1.0, 1e-14);
    EXPECT_NEAR(f.rss, 0.0, 1e-24);
    EXPECT_EQ(f.df_residual, 2u);
}

TEST(OlsFit, DuplicateColumnDropped) {
    const Dataset base = test::gaussian(12, 2, {1.0, 0.5}, 1.0, 4);
    Eigen::MatrixXd x(12, 3);
    x << base.x(), base.x().col(0);
    const Dataset d(x, base.y());
    const std::vector<Index> cols{0, 1, 2};
    const OlsFit f = fit(d, cols);
    EXPECT_EQ(f.dropped_columns, std::vector<Index>{2});
    EXPECT_EQ(f.columns, (std::vector<Index>{0, 1}));
    EXPECT_EQ(f.df_residual, 10u);
    const OlsFit plain = fit(base, std::vector<Index>{0, 1});
    EXPECT_NEAR(f.rss, plain.rss, 1e-10 * plain.rss);
}

TEST(OlsFit, Errors) {
    const Dataset d = test::gaussian(5, 6, {}, 1.0, 1);
    EXPECT_THROW(fit(d, std::vector<Index>{}), ConfigError);
    EXPECT_THROW(fit(d, std::vector<Index>{0, 1, 2, 3, 4}), NumericalError);
    EXPECT_THROW(fit(d, std::vector<Index>{0, 1, 2, 3}, true), NumericalError);
    EXPECT_THROW(fit(d, std::vector<Index>{0, 0}), ConfigError);
    EXPECT_THROW(fit(d, std::vector<Index>{6}), ConfigError);
    const OlsFit null_fit = fit(d, std::vector<Index>{}, true);
    EXPECT_TRUE(null_fit.columns.empty());
    EXPECT_EQ(null_fit.df_residual, 4u);
}

TEST(OlsFit, MatchesNormalEquations) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Dataset d = test::gaussian(20, 5, {1.0, -0.5, 0.0, 2.0, 0.3}, 1.0, seed);
        const std::vector<Index> cols{0, 1, 2, 3, 4};
        const OlsFit f = fit(d, cols);
        const Eigen::MatrixXd xtx = d.x().transpose() * d.x();
        const Eigen::VectorXd b = xtx.ldlt().solve(d.x().transpose() * d.y());
        for (int j = 0; j < 5; ++j) EXPECT_NEAR(f.coefficients[j], b(j), 1e-8 * std::max(1.0, std::abs(b(j))));

        // t and p against an independent Student-t distribution.
        const Eigen::VectorXd r = d.y() - d.x() * b;
        const double sigma2 = r.squaredNorm() / 15.0;
        const Eigen::MatrixXd inv = xtx.inverse();
        boost::math::students_t_distribution<double> td(15.0);
        for (int j = 0; j < 5; ++j) {
            const double t = b(j) / std::sqrt(sigma2 * inv(j, j));
            EXPECT_NEAR(f.t_values[j], t, 1e-8 * std::max(1.0, std::abs(t)));
            const double p = 2.0 * boost::math::cdf(boost::math::complement(td, std::abs(t)));
            EXPECT_NEAR(f.p_values[j], p, 1e-10);
        }
    }
}

TEST(OlsFit, InterceptMatchesExplicitConstantColumn) {
    const Dataset d = test::gaussian(20, 3, {1.0, 2.0}, 1.0, 9);
    Eigen::MatrixXd xi(20, 4);
    xi << Eigen::VectorXd::Ones(20), d.x();
    const Eigen::VectorXd b = (xi.transpose() * xi).ldlt().solve(xi.transpose() * (d.y().array() + 4.0).matrix());
    const Dataset shifted(d.x(), (d.y().array() + 4.0).matrix());
    const OlsFit f = fit(shifted, std::vector<Index>{0, 1, 2}, true);
    EXPECT_NEAR(f.intercept_value, b(0), 1e-9);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(f.coefficients[j], b(j + 1), 1e-9);
    EXPECT_EQ(f.df_residual, 16u);
}

TEST(OlsFit, ResidualOrthogonality) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Dataset d = test::gaussian(30, 12, {3.0, 0.0, -1.0}, 1.0, seed);
        const std::vector<Index> cols{0, 3, 5, 7, 11, 2};
        const OlsFit f = fit(d, cols);
        Eigen::VectorXd fitted = Eigen::VectorXd::Zero(30);
        for (std::size_t i = 0; i < f.columns.size(); ++i)
            fitted += f.coefficients[i] * d.x().col(static_cast<Eigen::Index>(f.columns[i]));
        const Eigen::VectorXd r = d.y() - fitted;
        EXPECT_NEAR(r.squaredNorm(), f.rss, 1e-10 * f.rss);
        for (Index c : f.columns) {
            const auto x = d.x().col(static_cast<Eigen::Index>(c));
            EXPECT_LT(std::abs(x.dot(r)), 1e-8 * x.norm() * d.y().norm());
        }
    }
}

TEST(OlsFit, RssNonIncreasingForNestedModels) {
    const Dataset d = test::gaussian(25, 15, {1.0, 1.0}, 1.0, 17);
    std::vector<Index> cols;
    double last = d.y().squaredNorm();
    for (Index j : {4, 0, 9, 1, 13, 7, 2, 11}) {
        cols.push_back(j);
        const double rss = fit(d, cols).rss;
        EXPECT_LE(rss, last * (1 + 1e-12));
        last = rss;
    }
}

TEST(OlsFit, PermutationEquivariant) {
    const Dataset d = test::gaussian(25, 8, {1.0, -2.0, 0.5}, 1.0, 21);
    const std::vector<Index> a{0, 1, 2, 5, 7};
    const std::vector<Index> b{7, 2, 0, 5, 1};
    const OlsFit fa = fit(d, a), fb = fit(d, b);
    EXPECT_EQ(fb.columns, b);
    EXPECT_NEAR(fa.rss, fb.rss, 1e-12 * fa.rss);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const std::size_t k = fa.position(b[i]);
        EXPECT_NEAR(fb.coefficients[i], fa.coefficients[k], 1e-10);
        EXPECT_NEAR(fb.t_values[i], fa.t_values[k], 1e-9);
    }
}

TEST(OlsFit, StrongSignalOutranksWeakOne) {
    // |t| for beta = 5 exceeds |t| for beta = 0.1 with the full true model.
    const auto spec = sim::make_example2();
    std::vector<Index> cols(10);
    std::iota(cols.begin(), cols.end(), Index{0});
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const Dataset d = sim::draw(spec, seed);
        const OlsFit f = fit(d, cols);
        wins += std::abs(f.t_values[9]) > std::abs(f.t_values[0]);
    }
    EXPECT_GE(wins, 990);
}

TEST(StudentT, EdgeValues) {
    EXPECT_DOUBLE_EQ(student_t_two_sided_p(0.0, 5.0), 1.0);
    EXPECT_DOUBLE_EQ(student_t_two_sided_p(HUGE_VAL, 5.0), 0.0);
    boost::math::students_t_distribution<double> td(3.0);
    for (double t : {0.1, 0.9, 1.7, 2.5, 10.0, 80.0}) {
        const double p = 2.0 * boost::math::cdf(boost::math::complement(td, t));
        EXPECT_NEAR(student_t_two_sided_p(t, 3.0), p, 1e-12 + 1e-10 * p);
        EXPECT_NEAR(student_t_two_sided_p(-t, 3.0), p, 1e-12 + 1e-10 * p);
    }
}

TEST(Stepwise, NoRemovalWhenAllSignificant) {
    const Dataset d = test::gaussian(40, 3, {3.0, -2.0, 4.0}, 0.5, 2);
    const std::vector<Index> cols{0, 1, 2};
    const OlsFit f = fit(d, cols), s = stepwise_backward(d, cols, 0.05);
    EXPECT_EQ(s.columns, f.columns);
    EXPECT_EQ(s.coefficients, f.coefficients);
    EXPECT_EQ(s.rss, f.rss);
}

TEST(Stepwise, UselessColumnLeavesInterceptOnly) {
    Eigen::MatrixXd x(8, 1);
    x << -1, 1, -1, 1, -1, 1, -1, 1;
    Eigen::VectorXd y(8);
    y << 1, 1, -1, -1, 1, 1, -1, -1;
    y.array() += 2.0;
    const Dataset d(x, y);
    const OlsFit f = fit(d, std::vector<Index>{0}, true);
    EXPECT_GT(f.p_values[0], 0.05);
    const OlsFit s = stepwise_backward(d, std::vector<Index>{0}, 0.05, true);
    EXPECT_TRUE(s.columns.empty());
    EXPECT_TRUE(s.intercept);
    EXPECT_NEAR(s.intercept_value, 2.0, 1e-12);
}

TEST(Stepwise, WithoutInterceptCanEmptyToNullModel) {
    Eigen::MatrixXd x(8, 1);
    x << -1, 1, -1, 1, -1, 1, -1, 1;
    Eigen::VectorXd y(8);
    y << 1, 1, -1, -1, 1, 1, -1, -1;
    const Dataset d(x, y);
    const OlsFit s = stepwise_backward(d, std::vector<Index>{0}, 0.05);
    EXPECT_TRUE(s.columns.empty());
    EXPECT_DOUBLE_EQ(s.rss, 8.0);
    EXPECT_EQ(s.df_residual, 8u);
}

TEST(Stepwise, KeepsTrueFeaturesAmongNoise) {
    const auto spec = sim::make_example1();
    std::vector<Index> cols(13);
    std::iota(cols.begin(), cols.end(), Index{0});
    int all_true = 0, false_total = 0;
    const int seeds = 200;
    for (int seed = 0; seed < seeds; ++seed) {
        const OlsFit s = stepwise_backward(sim::draw(spec, static_cast<std::uint64_t>(seed)), cols, 0.05);
        int t = 0;
        for (Index c : s.columns) (c < 3 ? t : false_total) += 1;
        all_true += t == 3;
    }
    EXPECT_GE(all_true, 180);
    EXPECT_LE(static_cast<double>(false_total) / seeds, 1.5);
}
