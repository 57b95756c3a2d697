#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvf/embedding.hpp"
#include "mvf/regression.hpp"
#include "mvf/timeseries.hpp"

namespace mvf {

struct HyperParams {
    std::size_t p = 5;
    double k_multiplier = 10.0;
    double trim_frac = 0.0;
    int horizon = 20;
    double q = 0.8;
    std::size_t n_partitions = 5;
    std::uint64_t seed = 1;

    void validate() const;
    bool operator==(const HyperParams&) const = default;
};

/// The coordinate universe the partitions are drawn from, plus the target series.
struct PoolSpec {
    std::vector<std::string> series;
    int max_lag = 30;
    int min_lag = 1;
    std::string target;

    std::vector<Coordinate> coordinates() const { return enumerate_pool(series, max_lag, min_lag); }
};

enum class Engine { LocalLinear, GlobalLinear, ForwardSelect };

const char* engine_name(Engine e);
Engine parse_engine(const std::string& name);

struct EnsembleOptions {
    Engine engine = Engine::LocalLinear;
    /// Forward selection term cap; 0 means p.
    std::size_t max_terms = 0;
    double ridge_eps = kDefaultRidgeEps;
    /// Worker hint. Output is identical for every value.
    std::size_t threads = 1;
};

/// Training block and the block of target times to forecast.
struct Split {
    TimeRange train;
    TimeRange test;
};

/// Split whose first `n_train` rows train and the remaining rows are tested.
Split split_at_row(const SeriesFrame& frame, std::size_t n_train);

struct PredictionSet {
    int horizon = 0;
    std::vector<Timestamp> base_times;
    /// #maps x #queries; NaN where a map could not predict (missing cells).
    RowMatrix per_map;
    /// Single-nearest-neighbor residuals, same shape as per_map (local engine only).
    RowMatrix nn_residuals;
    std::vector<std::string> map_labels;
    std::vector<double> combined;
    std::vector<double> truth;
    std::size_t skipped_specs = 0;
    std::size_t ridge_fits = 0;

    std::size_t size() const { return base_times.size(); }
};

/// Sort, drop floor(trim_frac * m) values from each end, average the rest.
double trimmed_mean(std::span<const double> values, double trim_frac);

/// The partitions an ensemble run draws: partition i uses seed
/// hp.seed + i * 0x9E3779B97F4A7C15, so partition 0 uses hp.seed itself.
std::vector<Partition> draw_partitions(const PoolSpec& pool, const HyperParams& hp);

/// Base times t whose target time t + h falls in `test` and exists in the frame.
std::vector<Timestamp> query_base_times(const SeriesFrame& frame, const TimeRange& test, int horizon);

/// Fits every spec of every partition on the training block and predicts the
/// query base times; per-query predictions are combined by trimmed mean in
/// spec order. Specs with too few complete rows are skipped and counted.
PredictionSet ensemble_predict(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                               const TimeRange& train_range, std::span<const Timestamp> query_times,
                               const EnsembleOptions& opts = {});

PredictionSet ensemble_predict(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                               const Split& split, const EnsembleOptions& opts = {});

/// Same as above with explicit delay maps instead of sampled partitions.
PredictionSet ensemble_predict_specs(const SeriesFrame& frame, const std::vector<DelayMapSpec>& specs,
                                     const HyperParams& hp, const TimeRange& train_range,
                                     std::span<const Timestamp> query_times, const EnsembleOptions& opts = {});

struct Skill {
    double correlation = 0.0;
    double mse = 0.0;
    std::size_t n = 0;
};

Skill skill_of(const PredictionSet& set);

struct HyperGrid {
    std::vector<std::size_t> p{2, 5};
    std::vector<double> k_multiplier{1, 2, 5, 10};
    std::vector<double> trim_frac{0.0, 0.1, 0.2};
};

struct CvCell {
    HyperParams hp;
    double mse = 0.0; // +inf when the cell could not be evaluated
};

struct CvResult {
    HyperParams best;
    std::vector<CvCell> cells;
};

/// Grid search by held-out MSE. `base` supplies the fields the grid does not
/// vary. Ties go to smaller p, then smaller multiplier, then smaller trim.
CvResult cross_validate(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& base,
                        const HyperGrid& grid, const Split& split, const EnsembleOptions& opts = {});

struct RollingResult {
    std::vector<PredictionSet> blocks;
    std::vector<HyperParams> used;         // hp applied to each block
    std::vector<std::size_t> window_starts; // first row of each predicted window
    PredictionSet combined;                 // blocks concatenated (per_map left empty)
    std::optional<HyperParams> next;        // tuned on the last window (grid runs only)
};

/// Slides a window of `window_len` rows by `step_len`. Each window trains on
/// its first window_len - step_len rows and predicts targets in its last
/// step_len rows. With a grid, window i+1 is predicted with the parameters
/// tuned on window i (so the first window is tuning only).
RollingResult rolling_origin_run(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                                 const std::optional<HyperGrid>& grid, std::size_t window_len,
                                 std::size_t step_len, const EnsembleOptions& opts = {});

struct HorizonSkill {
    int horizon = 0;
    Skill skill;
};

std::vector<HorizonSkill> horizon_sweep(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                                        const Split& split, std::span<const int> horizons,
                                        const EnsembleOptions& opts = {});

/// Columns time (the predicted target time), truth, combined and, when `per_map` is set, one column per map.
void write_predictions_csv(const PredictionSet& set, std::ostream& out, bool per_map = false);

} // namespace mvf
