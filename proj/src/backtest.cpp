#include "mvf/backtest.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "mvf/error.hpp"

namespace mvf {

void StrategyConfig::validate() const {
    require(cost_frac >= 0 && cost_frac < 1, "cost_frac must lie in [0, 1)");
    require(tax_rate >= 0 && tax_rate < 1, "tax_rate must lie in [0, 1)");
    require(initial_value > 0, "initial_value must be positive");
}

std::vector<Position> signal_from_predictions(std::span<const double> predicted_changes) {
    std::vector<Position> out;
    out.reserve(predicted_changes.size());
    Position state = Position::In;
    for (double p : predicted_changes) {
        if (p < 0) {
            state = Position::Out;
        } else if (p > 0) {
            state = Position::In;
        }
        out.push_back(state);
    }
    return out;
}

Ledger run_backtest(std::span<const double> prices, std::span<const Position> positions, const StrategyConfig& cfg,
                    std::span<const Timestamp> times) {
    cfg.validate();
    if (prices.size() != positions.size()) {
        throw Error("precondition", fmt::format("{} prices but {} positions", prices.size(), positions.size()));
    }
    require(!prices.empty(), "backtest needs at least one price");
    require(times.empty() || times.size() == prices.size(), "backtest times length mismatch");
    for (std::size_t t = 0; t < prices.size(); ++t) {
        if (!(prices[t] > 0) || !std::isfinite(prices[t])) {
            throw Error("precondition", fmt::format("nonpositive price {} at day {}", prices[t], t));
        }
    }

    Ledger led;
    const std::size_t n = prices.size();
    led.times.resize(n);
    led.position.assign(positions.begin(), positions.end());
    led.value.resize(n);
    led.costs_paid.resize(n);
    led.taxes_paid.resize(n);

    double value = cfg.initial_value;
    double basis = value;
    double carried_loss = 0.0;
    double costs = 0.0;
    double taxes = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        led.times[t] = times.empty() ? static_cast<Timestamp>(t) : times[t];
        if (t > 0) {
            if (positions[t - 1] == Position::In) {
                value *= prices[t] / prices[t - 1];
            }
            if (positions[t] != positions[t - 1]) {
                const double cost = value * cfg.cost_frac;
                value -= cost;
                costs += cost;
                ++led.trades;
            }
            if (cfg.tax_period > 0 && t % cfg.tax_period == 0) {
                double gain = value - basis;
                if (cfg.carry_forward_losses) {
                    const double offset = std::min(std::max(gain, 0.0), carried_loss);
                    carried_loss += std::max(-gain, 0.0) - offset;
                    gain -= offset;
                }
                const double tax = cfg.tax_rate * std::max(0.0, gain);
                value -= tax;
                taxes += tax;
                basis = value;
            }
        }
        led.value[t] = value;
        led.costs_paid[t] = costs;
        led.taxes_paid[t] = taxes;
    }
    return led;
}

Ledger buy_and_hold(std::span<const double> prices, const StrategyConfig& cfg, std::span<const Timestamp> times) {
    std::vector<Position> all_in(prices.size(), Position::In);
    return run_backtest(prices, all_in, cfg, times);
}

std::vector<double> geometric_random_walk(std::size_t n, double drift, double vol, std::uint64_t seed, double start) {
    require(start > 0, "random walk start must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> p(n);
    double level = start;
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) {
            level *= std::exp(drift + vol * normal(rng));
        }
        p[t] = level;
    }
    return p;
}

void write_ledger_csv(const Ledger& ledger, std::ostream& out) {
    out << "time,position,value,costs_paid,taxes_paid\n";
    for (std::size_t t = 0; t < ledger.value.size(); ++t) {
        out << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", ledger.times[t],
                           ledger.position[t] == Position::In ? "in" : "out", ledger.value[t], ledger.costs_paid[t],
                           ledger.taxes_paid[t]);
    }
}

} // namespace mvf
