#include "mvf/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mvf/error.hpp"

namespace mvf {

bool is_missing(double v) { return std::isnan(v); }

double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }

SeriesFrame::SeriesFrame(std::vector<Timestamp> times, std::vector<Column> columns,
                         std::vector<CalendarTag> calendar)
    : times_(std::move(times)), columns_(std::move(columns)), calendar_(std::move(calendar)) {
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (times_[i] <= times_[i - 1]) {
            throw Error("schema", fmt::format("timestamps not strictly increasing at {}", times_[i]));
        }
        if (times_[i] != times_[i - 1] + 1) {
            contiguous_ = false;
        }
    }
    if (!calendar_.empty() && calendar_.size() != times_.size()) {
        throw Error("schema", "calendar length differs from times");
    }
    std::set<std::string> names;
    for (auto& c : columns_) {
        if (c.values.size() != times_.size()) {
            throw Error("schema", fmt::format("column '{}' has {} rows, expected {}", c.name,
                                              c.values.size(), times_.size()));
        }
        if (!names.insert(c.name).second) {
            throw Error("schema", fmt::format("duplicate column name '{}'", c.name));
        }
        for (auto& v : c.values) {
            if (!std::isfinite(v)) {
                v = missing_value();
            }
        }
    }
}

std::vector<std::string> SeriesFrame::column_names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) {
        out.push_back(c.name);
    }
    return out;
}

bool SeriesFrame::has_column(const std::string& name) const {
    return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

std::size_t SeriesFrame::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].name == name) {
            return i;
        }
    }
    throw Error("schema", fmt::format("no column named '{}'", name));
}

std::span<const double> SeriesFrame::column(const std::string& name) const {
    return columns_[column_index(name)].values;
}

bool SeriesFrame::missing(const std::string& name, std::size_t row) const {
    return is_missing(column(name)[row]);
}

std::optional<std::size_t> SeriesFrame::row_of(Timestamp t) const {
    if (times_.empty()) {
        return std::nullopt;
    }
    if (contiguous_) {
        if (t < times_.front() || t > times_.back()) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(t - times_.front());
    }
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.end() || *it != t) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - times_.begin());
}

std::optional<double> SeriesFrame::value_at(const std::string& name, Timestamp t) const {
    auto row = row_of(t);
    if (!row) {
        return std::nullopt;
    }
    double v = column(name)[*row];
    if (is_missing(v)) {
        return std::nullopt;
    }
    return v;
}

SeriesFrame SeriesFrame::slice_rows(std::size_t begin, std::size_t end) const {
    end = std::min(end, size());
    begin = std::min(begin, end);
    std::vector<Timestamp> times(times_.begin() + begin, times_.begin() + end);
    std::vector<Column> cols;
    for (const auto& c : columns_) {
        cols.push_back({c.name, std::vector<double>(c.values.begin() + begin, c.values.begin() + end)});
    }
    std::vector<CalendarTag> cal;
    if (has_calendar()) {
        cal.assign(calendar_.begin() + begin, calendar_.begin() + end);
    }
    return SeriesFrame(std::move(times), std::move(cols), std::move(cal));
}

SeriesFrame SeriesFrame::slice(const TimeRange& range) const {
    auto lo = std::lower_bound(times_.begin(), times_.end(), range.first);
    auto hi = std::upper_bound(times_.begin(), times_.end(), range.last);
    return slice_rows(static_cast<std::size_t>(lo - times_.begin()),
                      static_cast<std::size_t>(hi - times_.begin()));
}

SeriesFrame SeriesFrame::with_column(const std::string& name, std::vector<double> values) const {
    auto cols = columns_;
    bool replaced = false;
    for (auto& c : cols) {
        if (c.name == name) {
            c.values = std::move(values);
            replaced = true;
            break;
        }
    }
    if (!replaced) {
        cols.push_back({name, std::move(values)});
    }
    return SeriesFrame(times_, std::move(cols), calendar_);
}

bool SeriesFrame::operator==(const SeriesFrame& other) const {
    if (times_ != other.times_ || calendar_ != other.calendar_ || columns_.size() != other.columns_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        const auto& a = columns_[i];
        const auto& b = other.columns_[i];
        if (a.name != b.name) {
            return false;
        }
        for (std::size_t r = 0; r < a.values.size(); ++r) {
            bool ma = is_missing(a.values[r]);
            bool mb = is_missing(b.values[r]);
            if (ma != mb || (!ma && a.values[r] != b.values[r])) {
                return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r\"");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::optional<long long> parse_int(const std::string& s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

double parse_cell(const std::string& s) {
    if (s.empty() || s == "NA") {
        return missing_value();
    }
    double v = 0;
    const char* first = s.data();
    if (*first == '+') {
        ++first;
    }
    auto [p, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
        return missing_value();
    }
    return v;
}

enum class TimeFormat { Integer, Month, Date };

struct ParsedTime {
    TimeFormat format;
    long long key; // sortable
    CalendarTag tag;
};

std::optional<ParsedTime> parse_time(const std::string& s) {
    if (auto v = parse_int(s)) {
        return ParsedTime{TimeFormat::Integer, *v, {}};
    }
    auto year = s.size() >= 7 && s[4] == '-' ? parse_int(s.substr(0, 4)) : std::nullopt;
    auto month = year ? parse_int(s.substr(5, 2)) : std::nullopt;
    if (!year || !month || *month < 1 || *month > 12) {
        return std::nullopt;
    }
    CalendarTag tag{static_cast<int>(*year), static_cast<int>(*month)};
    if (s.size() == 7) {
        return ParsedTime{TimeFormat::Month, monthly_timestamp(tag.year, tag.month), tag};
    }
    if (s.size() == 10 && s[7] == '-') {
        auto day = parse_int(s.substr(8, 2));
        if (day && *day >= 1 && *day <= 31) {
            return ParsedTime{TimeFormat::Date, monthly_timestamp(tag.year, tag.month) * 32 + *day, tag};
        }
    }
    return std::nullopt;
}

} // namespace

SeriesFrame parse_csv(std::istream& in, const CsvSchema& schema, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("schema", fmt::format("{}: empty file", source));
    }
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
        line = line.substr(3); // UTF-8 BOM
    }
    auto header = split_line(line);
    auto find_col = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw Error("schema", fmt::format("{}: missing required column '{}'", source, name));
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    std::size_t time_idx = find_col(schema.time_column);
    std::vector<std::size_t> col_idx;
    for (const auto& c : schema.columns) {
        col_idx.push_back(find_col(c));
    }

    struct Row {
        ParsedTime time;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    std::optional<TimeFormat> format;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto cells = split_line(line);
        if (cells.size() <= time_idx) {
            throw Error("schema", fmt::format("{}:{}: missing time cell", source, line_no));
        }
        auto t = parse_time(cells[time_idx]);
        if (!t) {
            throw Error("schema", fmt::format("{}:{}: unparseable time '{}'", source, line_no, cells[time_idx]));
        }
        if (format && *format != t->format) {
            throw Error("schema", fmt::format("{}:{}: mixed time formats", source, line_no));
        }
        format = t->format;
        Row r{*t, {}};
        for (auto ci : col_idx) {
            r.values.push_back(ci < cells.size() ? parse_cell(cells[ci]) : missing_value());
        }
        rows.push_back(std::move(r));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.time.key < b.time.key; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].time.key == rows[i - 1].time.key) {
            const auto& tag = rows[i].time.tag;
            std::string shown = rows[i].time.format == TimeFormat::Integer
                                    ? std::to_string(rows[i].time.key)
                                    : fmt::format("{:04d}-{:02d}", tag.year, tag.month);
            if (rows[i].time.format == TimeFormat::Date) {
                shown += fmt::format("-{:02d}", rows[i].time.key % 32);
            }
            throw Error("schema", fmt::format("{}: duplicate timestamp {}", source, shown));
        }
    }

    std::vector<Timestamp> times;
    std::vector<CalendarTag> calendar;
    std::vector<SeriesFrame::Column> cols;
    for (const auto& c : schema.columns) {
        cols.push_back({c, {}});
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        switch (r.time.format) {
        case TimeFormat::Integer: times.push_back(r.time.key); break;
        case TimeFormat::Month: times.push_back(r.time.key); break;
        case TimeFormat::Date: times.push_back(static_cast<Timestamp>(i)); break;
        }
        if (r.time.format != TimeFormat::Integer) {
            calendar.push_back(r.time.tag);
        }
        for (std::size_t c = 0; c < cols.size(); ++c) {
            cols[c].values.push_back(r.values[c]);
        }
    }
    return SeriesFrame(std::move(times), std::move(cols), std::move(calendar));
}

SeriesFrame ingest_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw Error("io", fmt::format("cannot open '{}'", path));
    }
    return parse_csv(in, schema, path);
}

void write_csv(const SeriesFrame& frame, std::ostream& out) {
    out << "time";
    for (const auto& c : frame.columns()) {
        out << ',' << c.name;
    }
    out << '\n';
    for (std::size_t r = 0; r < frame.size(); ++r) {
        out << frame.times()[r];
        for (const auto& c : frame.columns()) {
            out << ',';
            if (is_missing(c.values[r])) {
                out << "NA";
            } else {
                out << fmt::format("{:.17g}", c.values[r]);
            }
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// transforms

SeriesFrame align_join(const std::vector<SeriesFrame>& frames) {
    require(!frames.empty(), "align_join needs at least one frame");
    std::set<std::string> names;
    for (const auto& f : frames) {
        for (const auto& c : f.columns()) {
            if (!names.insert(c.name).second) {
                throw Error("schema", fmt::format("column name '{}' appears in more than one input", c.name));
            }
        }
    }
    std::vector<Timestamp> common(frames.front().times().begin(), frames.front().times().end());
    for (std::size_t i = 1; i < frames.size(); ++i) {
        std::vector<Timestamp> next;
        auto t = frames[i].times();
        std::set_intersection(common.begin(), common.end(), t.begin(), t.end(), std::back_inserter(next));
        common = std::move(next);
    }
    if (common.empty()) {
        std::string ranges;
        for (const auto& f : frames) {
            if (!ranges.empty()) {
                ranges += ", ";
            }
            ranges += f.size() == 0 ? std::string("[]")
                                    : fmt::format("[{}, {}]", f.times().front(), f.times().back());
        }
        throw Error("schema", fmt::format("inputs share no timestamps: {}", ranges));
    }

    // Columns are emitted in sorted-name order so the result does not depend
    // on the order of the inputs.
    std::map<std::string, std::vector<double>> by_name;
    std::vector<CalendarTag> calendar;
    for (const auto& f : frames) {
        std::vector<std::size_t> rows;
        rows.reserve(common.size());
        for (auto t : common) {
            rows.push_back(*f.row_of(t));
        }
        for (const auto& c : f.columns()) {
            auto& dst = by_name[c.name];
            for (auto r : rows) {
                dst.push_back(c.values[r]);
            }
        }
        if (calendar.empty() && f.has_calendar()) {
            for (auto r : rows) {
                calendar.push_back(f.calendar()[r]);
            }
        }
    }
    std::vector<SeriesFrame::Column> cols;
    for (auto& [name, values] : by_name) {
        cols.push_back({name, std::move(values)});
    }
    return SeriesFrame(std::move(common), std::move(cols), std::move(calendar));
}

std::array<double, 12> monthly_means(const SeriesFrame& frame, const std::string& column,
                                     const TimeRange& train_range) {
    require(frame.has_calendar(), "monthly anomaly needs calendar month tags");
    auto values = frame.column(column);
    std::array<double, 12> sum{};
    std::array<int, 12> count{};
    for (std::size_t r = 0; r < frame.size(); ++r) {
        if (!train_range.contains(frame.times()[r]) || is_missing(values[r])) {
            continue;
        }
        int m = frame.calendar()[r].month - 1;
        sum[m] += values[r];
        ++count[m];
    }
    static constexpr const char* kMonths[] = {"January", "February", "March",     "April",   "May",      "June",
                                              "July",    "August",   "September", "October", "November", "December"};
    std::array<double, 12> mean{};
    for (int m = 0; m < 12; ++m) {
        if (count[m] == 0) {
            throw Error("precondition",
                        fmt::format("calendar month {} ({}) has no observations in the train range", m + 1,
                                    kMonths[m]));
        }
        mean[m] = sum[m] / count[m];
    }
    return mean;
}

SeriesFrame monthly_anomaly(const SeriesFrame& frame, const std::string& column, const TimeRange& train_range) {
    auto means = monthly_means(frame, column, train_range);
    auto values = frame.column(column);
    std::vector<double> out(values.begin(), values.end());
    for (std::size_t r = 0; r < out.size(); ++r) {
        if (!is_missing(out[r])) {
            out[r] -= means[frame.calendar()[r].month - 1];
        }
    }
    return frame.with_column(column, std::move(out));
}

SeriesFrame first_difference(const SeriesFrame& frame, const std::string& column) {
    if (frame.size() < 2) {
        throw Error("precondition", "first_difference needs at least 2 rows");
    }
    auto values = frame.column(column);
    std::vector<double> diff(frame.size() - 1);
    for (std::size_t t = 0; t + 1 < frame.size(); ++t) {
        diff[t] = values[t + 1] - values[t]; // NaN propagates
    }
    return frame.slice_rows(0, frame.size() - 1).with_column(column, std::move(diff));
}

} // namespace mvf
