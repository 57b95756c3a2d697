#pragma once

#include <span>
#include <vector>

namespace mvf::stats {

double mean(std::span<const double> xs);
/// Sample standard deviation (n-1 denominator).
double sample_sd(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

/// Pearson correlation over pairs where both values are finite. NaN when
/// fewer than two pairs or either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Mean squared difference over finite pairs.
double mse(std::span<const double> pred, std::span<const double> truth);

/// Type-7 quantile: h = (n-1) * prob, linear interpolation between the
/// order statistics floor(h) and floor(h)+1 (zero-based). `sorted` must be
/// ascending and non-empty.
double quantile_type7(std::span<const double> sorted, double prob);

double normal_cdf(double z);
double normal_quantile(double prob);

} // namespace mvf::stats
