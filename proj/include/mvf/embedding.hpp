#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvf/timeseries.hpp"

namespace mvf {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One delay coordinate: `series` observed `lag` recorded steps before the
/// base time.
struct Coordinate {
    std::string series;
    int lag = 0;

    auto operator<=>(const Coordinate&) const = default;
};

/// The dependent variable: `series` observed `horizon` steps after the base time.
struct Target {
    std::string series;
    int horizon = 1;

    bool operator==(const Target&) const = default;
};

struct DelayMapSpec {
    std::vector<Coordinate> coords;
    Target target;

    std::size_t dimension() const { return coords.size(); }
    int max_lag() const;
    void validate() const;

    bool operator==(const DelayMapSpec&) const = default;
};

/// A seeded set of pairwise-disjoint delay maps drawn from `pool`.
struct Partition {
    std::vector<DelayMapSpec> specs;
    std::vector<Coordinate> pool;
    std::uint64_t seed = 0;
    std::size_t p = 0;

    bool operator==(const Partition&) const = default;
};

/// Regression matrix realized for one spec. Row i is the delay vector at
/// `base_times[i]`, `y[i]` the target value `horizon` steps later.
struct DesignMatrix {
    RowMatrix X;
    Eigen::VectorXd y;
    std::vector<Timestamp> base_times;

    std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }
};

/// Every (series, lag) with lag in [min_lag, max_lag], lag-major so that
/// series interleave.
std::vector<Coordinate> enumerate_pool(const std::vector<std::string>& series, int max_lag, int min_lag = 1);

std::uint64_t pool_hash(std::span<const Coordinate> pool);

/// Shuffles `pool` with the seeded generator and cuts it into
/// floor(|pool| / p) consecutive blocks of p coordinates. Leftovers are dropped.
Partition sample_disjoint_partition(const std::vector<Coordinate>& pool, std::size_t p, const Target& target,
                                    std::uint64_t seed);

void write_manifest(const Partition& partition, std::ostream& out);
Partition read_manifest(std::istream& in);

/// Delay vector at `base`, or nullopt when a cell is missing or out of range.
std::optional<Eigen::VectorXd> delay_vector(const SeriesFrame& frame, const DelayMapSpec& spec, Timestamp base);
std::optional<double> target_value(const SeriesFrame& frame, const DelayMapSpec& spec, Timestamp base);

/// One row per base time whose lagged cells and target cell all exist.
DesignMatrix build_design(const SeriesFrame& frame, const DelayMapSpec& spec);

} // namespace mvf
