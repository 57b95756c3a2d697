#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mvf {

/// Ordinal sample index. Monthly data uses year*12 + (month-1); daily market
/// data uses the trading-day rank.
using Timestamp = std::int64_t;

struct CalendarTag {
    int year = 0;
    int month = 1; // 1..12

    bool operator==(const CalendarTag&) const = default;
};

/// Inclusive interval of timestamps.
struct TimeRange {
    Timestamp first = 0;
    Timestamp last = 0;

    bool contains(Timestamp t) const { return t >= first && t <= last; }
    bool operator==(const TimeRange&) const = default;
};

inline Timestamp monthly_timestamp(int year, int month) {
    return static_cast<Timestamp>(year) * 12 + (month - 1);
}

inline CalendarTag calendar_of_monthly(Timestamp t) {
    auto year = t >= 0 ? t / 12 : (t - 11) / 12;
    return {static_cast<int>(year), static_cast<int>(t - year * 12) + 1};
}

bool is_missing(double v);
double missing_value();

/// Immutable, time-indexed multivariate real series. Missing cells are stored
/// as NaN; every other cell is finite.
class SeriesFrame {
public:
    struct Column {
        std::string name;
        std::vector<double> values;
    };

    SeriesFrame() = default;

    /// Validates: times strictly increasing, every column (and the calendar,
    /// when non-empty) as long as times, unique column names. Non-finite
    /// values are normalized to the missing marker.
    SeriesFrame(std::vector<Timestamp> times, std::vector<Column> columns,
                std::vector<CalendarTag> calendar = {});

    std::size_t size() const { return times_.size(); }
    std::span<const Timestamp> times() const { return times_; }
    bool has_calendar() const { return !calendar_.empty(); }
    std::span<const CalendarTag> calendar() const { return calendar_; }

    std::vector<std::string> column_names() const;
    const std::vector<Column>& columns() const { return columns_; }
    bool has_column(const std::string& name) const;
    std::span<const double> column(const std::string& name) const;
    std::size_t column_index(const std::string& name) const;

    bool missing(const std::string& name, std::size_t row) const;

    /// Row holding timestamp `t`, if any.
    std::optional<std::size_t> row_of(Timestamp t) const;

    /// Value of `name` at timestamp `t`; nullopt when the timestamp is absent
    /// or the cell is missing.
    std::optional<double> value_at(const std::string& name, Timestamp t) const;

    /// Rows whose timestamps lie in `range`.
    SeriesFrame slice(const TimeRange& range) const;
    /// Rows [begin, end) by position.
    SeriesFrame slice_rows(std::size_t begin, std::size_t end) const;

    SeriesFrame with_column(const std::string& name, std::vector<double> values) const;

    bool operator==(const SeriesFrame& other) const;

private:
    std::vector<Timestamp> times_;
    std::vector<Column> columns_;
    std::vector<CalendarTag> calendar_;
    bool contiguous_ = true;
};

struct CsvSchema {
    std::string time_column = "time";
    std::vector<std::string> columns;
};

/// Reads a header-first CSV. The time column holds integers, ISO `YYYY-MM`
/// months, or ISO `YYYY-MM-DD` dates (ranked into a trading-day index).
/// Empty and `NA` cells (and anything unparseable) become missing.
SeriesFrame ingest_csv(const std::string& path, const CsvSchema& schema);
SeriesFrame parse_csv(std::istream& in, const CsvSchema& schema, const std::string& source = "<stream>");

void write_csv(const SeriesFrame& frame, std::ostream& out);

/// Inner join on timestamps. Column names must be globally unique.
SeriesFrame align_join(const std::vector<SeriesFrame>& frames);

/// Mean of `column` per calendar month over `train_range`; index 0 is January.
std::array<double, 12> monthly_means(const SeriesFrame& frame, const std::string& column,
                                     const TimeRange& train_range);

/// Replaces `column` by its deviation from the train-range mean of the same
/// calendar month.
SeriesFrame monthly_anomaly(const SeriesFrame& frame, const std::string& column,
                            const TimeRange& train_range);

/// Replaces `column` by x[t+1] - x[t] stored at t; the last row is dropped
/// from every column.
SeriesFrame first_difference(const SeriesFrame& frame, const std::string& column);

} // namespace mvf
