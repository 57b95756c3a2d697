#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mvf/backtest.hpp"
#include "mvf/error.hpp"

using namespace mvf;

namespace {

constexpr Position In = Position::In;
constexpr Position Out = Position::Out;

StrategyConfig no_friction() {
    StrategyConfig c;
    c.cost_frac = 0;
    c.tax_rate = 0;
    c.tax_period = 0;
    return c;
}

} // namespace

TEST(Signal, Rules) {
    EXPECT_EQ(signal_from_predictions(std::vector<double>{1, 2, 0.5}), (std::vector<Position>{In, In, In}));
    EXPECT_EQ(signal_from_predictions(std::vector<double>{1, -1, 1}), (std::vector<Position>{In, Out, In}));
    EXPECT_EQ(signal_from_predictions(std::vector<double>{0, 0, 0}), (std::vector<Position>{In, In, In}));
    EXPECT_EQ(signal_from_predictions(std::vector<double>{-1, 0, 0, 2}), (std::vector<Position>{Out, Out, Out, In}));
}

TEST(Backtest, AlwaysInEqualsPriceRatio) {
    auto prices = geometric_random_walk(500, 0.0002, 0.01, 3);
    auto led = run_backtest(prices, std::vector<Position>(500, In), no_friction());
    EXPECT_NEAR(led.final_value() / (prices.back() / prices.front()), 1.0, 1e-12);
    EXPECT_EQ(led.trades, 0u);
}

TEST(Backtest, ThreeDayHandLedger) {
    StrategyConfig c = no_friction();
    c.cost_frac = 0.003;
    std::vector<double> prices{100, 110, 99};
    auto led = run_backtest(prices, std::vector<Position>{In, Out, Out}, c);
    EXPECT_NEAR(led.value[1], 1.10 * 0.997, 1e-15);
    EXPECT_NEAR(led.final_value(), 1.0967, 1e-12);
    EXPECT_EQ(led.trades, 1u);
    EXPECT_NEAR(led.costs_paid.back(), 1.10 * 0.003, 1e-15);
}

TEST(Backtest, TaxOnHalfUnitGain) {
    StrategyConfig c = no_friction();
    c.tax_rate = 0.36;
    c.tax_period = 1;
    auto led = run_backtest(std::vector<double>{100, 150}, std::vector<Position>{In, In}, c);
    EXPECT_NEAR(led.taxes_paid[1] - led.taxes_paid[0], 0.18, 1e-12);
    EXPECT_NEAR(led.final_value(), 1.32, 1e-12);
}

TEST(Backtest, TaxBasisResetsWithoutCarryForward) {
    StrategyConfig c = no_friction();
    c.tax_rate = 0.5;
    c.tax_period = 1;
    // Gain 1 -> taxed to 1.5; loss to 0.75 untaxed; back up to 1.5 taxed on 0.75.
    std::vector<double> p{100, 200, 100, 200};
    auto led = run_backtest(p, std::vector<Position>(4, In), c);
    EXPECT_NEAR(led.value[1], 1.5, 1e-12);
    EXPECT_NEAR(led.value[2], 0.75, 1e-12);
    EXPECT_NEAR(led.value[3], 1.5 - 0.375, 1e-12);
    c.carry_forward_losses = true;
    auto carried = run_backtest(p, std::vector<Position>(4, In), c);
    // The 0.75 loss offsets the next 0.75 gain entirely.
    EXPECT_NEAR(carried.value[3], 1.5, 1e-12);
}

TEST(Backtest, LogValueDecomposition) {
    StrategyConfig c;
    c.tax_period = 50;
    auto prices = geometric_random_walk(800, 0.0005, 0.012, 9);
    std::mt19937_64 rng(2);
    std::bernoulli_distribution coin(0.5);
    std::vector<Position> pos(800);
    for (auto& p : pos) {
        p = coin(rng) ? In : Out;
    }
    auto led = run_backtest(prices, pos, c);
    double in_part = 0, tax_part = 0;
    for (std::size_t t = 1; t < prices.size(); ++t) {
        if (pos[t - 1] == In) {
            in_part += std::log(prices[t] / prices[t - 1]);
        }
        const double tax = led.taxes_paid[t] - led.taxes_paid[t - 1];
        if (tax > 0) {
            const double before = led.value[t] + tax;
            tax_part += std::log(led.value[t] / before);
        }
    }
    const double cost_part = static_cast<double>(led.trades) * std::log(1.0 - c.cost_frac);
    EXPECT_NEAR(std::log(led.final_value()), in_part + cost_part + tax_part, 1e-12);
    for (std::size_t t = 1; t < prices.size(); ++t) {
        EXPECT_GE(led.costs_paid[t], led.costs_paid[t - 1]);
        EXPECT_GE(led.taxes_paid[t], led.taxes_paid[t - 1]);
        EXPECT_GT(led.value[t], 0);
    }
}

TEST(Backtest, TradesCountPositionChanges) {
    std::vector<Position> pos{In, Out, Out, In, Out, In};
    auto led = run_backtest(std::vector<double>(6, 10.0), pos, StrategyConfig{});
    EXPECT_EQ(led.trades, 4u);
    EXPECT_NEAR(led.final_value(), std::pow(0.997, 4), 1e-15);
}

TEST(Backtest, Preconditions) {
    EXPECT_THROW(run_backtest(std::vector<double>{1, 2}, std::vector<Position>{In}, {}), Error);
    EXPECT_THROW(run_backtest(std::vector<double>{1, 0}, std::vector<Position>{In, In}, {}), Error);
    StrategyConfig bad;
    bad.cost_frac = 1.0;
    EXPECT_THROW(run_backtest(std::vector<double>{1, 2}, std::vector<Position>{In, In}, bad), Error);
}

TEST(BuyAndHold, MatchesAllInAndTaxDrag) {
    auto prices = geometric_random_walk(1200, 0.001, 0.005, 4);
    StrategyConfig c;
    auto bh = buy_and_hold(prices, c);
    auto all_in = run_backtest(prices, std::vector<Position>(prices.size(), In), c);
    EXPECT_EQ(bh.value, all_in.value);
    std::vector<double> rising(1200);
    for (std::size_t i = 0; i < rising.size(); ++i) {
        rising[i] = 100.0 + static_cast<double>(i);
    }
    EXPECT_LT(buy_and_hold(rising, c).final_value(), buy_and_hold(rising, no_friction()).final_value());
}

TEST(BuyAndHold, ZeroPredictionsNeverTrade) {
    auto prices = geometric_random_walk(300, 0, 0.01, 5);
    auto pos = signal_from_predictions(std::vector<double>(300, 0.0));
    StrategyConfig c;
    EXPECT_EQ(run_backtest(prices, pos, c).value, buy_and_hold(prices, c).value);
}

TEST(RandomWalk, DeterministicAndPositive) {
    auto a = geometric_random_walk(100, 0.0, 0.02, 7, 50.0);
    EXPECT_EQ(a, geometric_random_walk(100, 0.0, 0.02, 7, 50.0));
    EXPECT_NE(a, geometric_random_walk(100, 0.0, 0.02, 8, 50.0));
    EXPECT_EQ(a[0], 50.0);
    for (double p : a) {
        EXPECT_GT(p, 0);
    }
}

TEST(Ledger, CsvLayout) {
    auto led = run_backtest(std::vector<double>{100, 110, 99}, std::vector<Position>{In, Out, Out}, StrategyConfig{},
                            std::vector<Timestamp>{5, 6, 8});
    std::ostringstream out;
    write_ledger_csv(led, out);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "time,position,value,costs_paid,taxes_paid");
    EXPECT_NE(out.str().find("\n8,out,"), std::string::npos);
}
