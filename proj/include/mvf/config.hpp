#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvf/backtest.hpp"
#include "mvf/lorenz.hpp"
#include "mvf/multiview.hpp"
#include "mvf/timeseries.hpp"

namespace mvf {

struct CsvInput {
    std::string path;
    std::string time_column = "time";
    std::vector<std::string> columns;
};

struct AnomalyStep {
    std::string column;
    TimeRange train;
};

struct DataConfig {
    enum class Source { Lorenz, Csv, RandomWalk };
    Source source = Source::Lorenz;
    LorenzParams lorenz;
    std::vector<CsvInput> files;
    std::vector<AnomalyStep> anomaly;
    std::vector<std::string> difference;
    // random_walk source: one column named "close"
    std::size_t walk_length = 3000;
    double walk_drift = 0.0003;
    double walk_vol = 0.01;
    double walk_start = 100.0;
};

struct SplitConfig {
    std::optional<std::size_t> train_rows;
    double train_fraction = 0.8;

    Split resolve(const SeriesFrame& frame) const;
};

struct PredictConfig {
    std::vector<Engine> engines{Engine::GlobalLinear, Engine::LocalLinear};
    bool per_map = false;
    bool residual_overlay = false;
    bool rescale = false;
    double interval_level = 0.9;
    std::size_t max_terms = 0;
};

struct TuneConfig {
    HyperGrid grid;
    std::size_t window_len = 0; // 0: single split instead of a rolling run
    std::size_t step_len = 0;
};

struct InferConfig {
    std::size_t replicates = 125;
    std::size_t n_mc = 10000;
};

struct BacktestConfig {
    StrategyConfig strategy;
    Engine engine = Engine::LocalLinear;
    std::string price_column = "close";
    std::string signals = "model"; // model | always_in | random
};

/// Everything a CLI run depends on. Paths are resolved against the config
/// file's directory.
struct RunConfig {
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    DataConfig data;
    PoolSpec embedding{{"x"}, 30, 1, "x"};
    HyperParams hyper;
    SplitConfig split;
    PredictConfig predict;
    TuneConfig tune;
    InferConfig infer;
    BacktestConfig backtest;

    nlohmann::ordered_json to_json() const;
};

/// Parses a JSON config document. Syntax errors and unknown or ill-typed keys
/// raise Error("config", ...) with the line number of the offending text.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Builds the series frame a config describes (generate or ingest, then
/// anomaly and differencing steps). `seed` drives the random-walk source.
SeriesFrame load_frame(const DataConfig& data, std::uint64_t seed);

} // namespace mvf
