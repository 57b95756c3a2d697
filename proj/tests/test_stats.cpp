#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mvf/error.hpp"
#include "mvf/stats.hpp"

using namespace mvf;

TEST(Stats, MeanVarianceSd) {
    std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    EXPECT_DOUBLE_EQ(stats::mean(v), 5.0);
    EXPECT_DOUBLE_EQ(stats::sample_variance(v), 32.0 / 7.0);
    EXPECT_DOUBLE_EQ(stats::sample_sd(v), std::sqrt(32.0 / 7.0));
}

TEST(Stats, PearsonBasics) {
    std::vector<double> a{1, 2, 3, 4, 5};
    std::vector<double> b{2, 4, 6, 8, 10};
    std::vector<double> c{5, 4, 3, 2, 1};
    EXPECT_NEAR(stats::pearson(a, b), 1.0, 1e-15);
    EXPECT_NEAR(stats::pearson(a, c), -1.0, 1e-15);
    // By hand: x {1,2,3}, y {1,3,2}: sxy 1, sxx 2, syy 2 -> 0.5
    EXPECT_NEAR(stats::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}), 0.5, 1e-15);
    EXPECT_TRUE(std::isnan(stats::pearson(a, std::vector<double>(5, 1.0))));
}

TEST(Stats, PearsonSkipsNonFinitePairs) {
    std::vector<double> a{1, 2, NAN, 3};
    std::vector<double> b{1, 3, 100, 2};
    EXPECT_NEAR(stats::pearson(a, b), 0.5, 1e-15);
}

TEST(Stats, Mse) {
    EXPECT_DOUBLE_EQ(stats::mse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 4, 0}), 13.0 / 3.0);
}

TEST(Stats, QuantileType7ByHand) {
    std::vector<double> s{-1, 0, 1};
    // h = 2 * p
    EXPECT_DOUBLE_EQ(stats::quantile_type7(s, 0.0), -1.0);
    EXPECT_DOUBLE_EQ(stats::quantile_type7(s, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(stats::quantile_type7(s, 0.5), 0.0);
    EXPECT_NEAR(stats::quantile_type7(s, 1.0 / 6.0), -2.0 / 3.0, 1e-15);
    std::vector<double> t{10, 20, 30, 40};
    EXPECT_DOUBLE_EQ(stats::quantile_type7(t, 0.25), 17.5); // h = 0.75
    EXPECT_THROW(stats::quantile_type7(std::vector<double>{}, 0.5), Error);
}

TEST(Stats, NormalFunctions) {
    EXPECT_NEAR(stats::normal_cdf(0.0), 0.5, 1e-15);
    EXPECT_NEAR(stats::normal_cdf(1.959963984540054), 0.975, 1e-12);
    EXPECT_NEAR(stats::normal_quantile(0.975), 1.959963984540054, 1e-12);
    for (double p : {0.001, 0.1, 0.37, 0.5, 0.9, 0.999}) {
        EXPECT_NEAR(stats::normal_cdf(stats::normal_quantile(p)), p, 1e-12);
    }
}
