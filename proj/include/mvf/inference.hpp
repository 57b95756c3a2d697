#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "mvf/multiview.hpp"

namespace mvf {

/// Pooled single-nearest-neighbor residuals: the empirical predictive
/// distribution around a forecast.
struct ResidualPool {
    std::vector<double> residuals;
    double q = 0.0;
    HyperParams hp;
    std::size_t spec_count = 0;

    std::size_t size() const { return residuals.size(); }
};

/// Trains every delay map on the first floor(q*n) rows, predicts each target
/// in the remaining rows and keeps the residual of the nearest training
/// neighbor. Residuals from all maps are pooled.
ResidualPool residual_pool(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                           const EnsembleOptions& opts = {});

/// Same, reading the residuals off an existing local-engine prediction set.
ResidualPool residual_pool_from(const PredictionSet& set, const HyperParams& hp);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// prediction + type-7 quantiles (1-level)/2 and (1+level)/2 of the pool.
Interval predictive_interval(double prediction, const ResidualPool& pool, double level);

/// Affine map taking [min preds, max preds] onto [min draws, max draws].
std::vector<double> rescale_to_pool_range(std::span<const double> preds, std::span<const double> pool_draws);

/// Monte Carlo Lilliefors test: KS distance of the standardized sample from
/// N(0,1), with the p-value taken as the fraction of `n_mc` standardized
/// Gaussian samples of the same size whose distance is larger.
double lilliefors_statistic(std::span<const double> sample);
double lilliefors_normality(std::span<const double> sample, std::size_t n_mc = 10000, std::uint64_t seed = 1);

/// Simulated null distribution of the statistic for one sample size, reusable
/// across many samples of that size.
class LillieforsNull {
public:
    LillieforsNull(std::size_t sample_size, std::size_t n_mc, std::uint64_t seed);

    double p_value(std::span<const double> sample) const;
    std::size_t sample_size() const { return n_; }

private:
    std::size_t n_;
    std::vector<double> sorted_stats_;
};

struct ResampleReport {
    std::vector<double> correlations;
    double mean = 0.0;
    double sd = 0.0;
    /// (standard normal quantile, standardized order statistic), Blom positions.
    std::vector<std::pair<double, double>> qq_pairs;
    double ks_p = 0.0;
    double bound_center = 0.0;
    double bound_halfwidth = 0.0; // 1.96 * sd
};

/// Summary statistics, QQ pairs and the normality p-value for a set of
/// resampled correlations.
ResampleReport summarize_correlations(std::vector<double> correlations, std::size_t n_mc = 10000,
                                      std::uint64_t seed = 1);

/// Replicate r (1..R) re-draws the partitions with seed base_seed + r and
/// records the Pearson correlation of combined predictions with the truth.
ResampleReport resample_correlations(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                                     const Split& split, std::size_t R, std::uint64_t base_seed,
                                     const EnsembleOptions& opts = {}, std::size_t n_mc = 10000);

struct VarianceScaling {
    double var_small = 0.0;
    double var_large = 0.0;
    double ratio = 0.0; // var_small / var_large
};

/// For each test size m, tests on the last m rows of `frame` and trains on
/// everything before; returns the ratio of resampled-correlation variances.
VarianceScaling variance_scaling_check(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                                       std::pair<std::size_t, std::size_t> sizes, std::size_t R,
                                       std::uint64_t base_seed, const EnsembleOptions& opts = {});

void write_correlations_csv(const ResampleReport& report, std::ostream& out);
void write_qq_csv(const ResampleReport& report, std::ostream& out);
void write_summary_json(const ResampleReport& report, std::ostream& out);

} // namespace mvf
