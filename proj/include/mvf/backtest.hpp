#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mvf/timeseries.hpp"

namespace mvf {

enum class Position : std::uint8_t { Out = 0, In = 1 };

struct StrategyConfig {
    double cost_frac = 0.003;  // fraction of value paid per position change
    double tax_rate = 0.36;    // applied to gains at each assessment
    std::size_t tax_period = 504; // trading days between assessments; 0 disables tax
    double initial_value = 1.0;
    bool carry_forward_losses = false;

    void validate() const;
};

struct Ledger {
    std::vector<Timestamp> times;
    std::vector<Position> position;
    std::vector<double> value;
    std::vector<double> costs_paid; // cumulative
    std::vector<double> taxes_paid; // cumulative
    std::size_t trades = 0;

    double final_value() const { return value.back(); }
};

/// Out when the predicted change is negative, in when positive, unchanged at
/// zero. The state before the first prediction is In.
std::vector<Position> signal_from_predictions(std::span<const double> predicted_changes);

/// Daily accounting. Day t marks to market with the position held since
/// t-1, then switches to positions[t] (paying cost_frac of value on a
/// change), then, every tax_period days, pays tax_rate on the gain over the
/// basis and resets the basis. positions[0] is the starting state and is free.
Ledger run_backtest(std::span<const double> prices, std::span<const Position> positions, const StrategyConfig& cfg,
                    std::span<const Timestamp> times = {});

/// Always-in run with no trades; tax still applies when configured.
Ledger buy_and_hold(std::span<const double> prices, const StrategyConfig& cfg, std::span<const Timestamp> times = {});

/// Geometric random walk p[t+1] = p[t] * exp(drift + vol * N(0,1)).
std::vector<double> geometric_random_walk(std::size_t n, double drift, double vol, std::uint64_t seed,
                                          double start = 100.0);

/// Columns time, position, value, costs_paid, taxes_paid.
void write_ledger_csv(const Ledger& ledger, std::ostream& out);

} // namespace mvf
