#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "mvf/error.hpp"
#include "mvf/timeseries.hpp"

using namespace mvf;

namespace {

SeriesFrame monthly_frame(int year0, int month0, std::vector<double> values, const std::string& name = "v") {
    std::vector<Timestamp> t;
    std::vector<CalendarTag> cal;
    for (std::size_t i = 0; i < values.size(); ++i) {
        Timestamp ts = monthly_timestamp(year0, month0) + static_cast<Timestamp>(i);
        t.push_back(ts);
        cal.push_back(calendar_of_monthly(ts));
    }
    return SeriesFrame(t, {{name, std::move(values)}}, cal);
}

SeriesFrame indexed(std::vector<Timestamp> t, const std::string& name, std::vector<double> v) {
    return SeriesFrame(std::move(t), {{name, std::move(v)}});
}

std::string error_code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

} // namespace

TEST(SeriesFrame, RejectsNonIncreasingTimes) {
    EXPECT_THROW(indexed({0, 2, 2}, "a", {1, 2, 3}), Error);
    EXPECT_THROW(indexed({3, 1}, "a", {1, 2}), Error);
}

TEST(SeriesFrame, RejectsLengthMismatchAndDuplicateNames) {
    EXPECT_THROW(indexed({0, 1, 2}, "a", {1, 2}), Error);
    EXPECT_THROW(SeriesFrame({0, 1}, {{"a", {1, 2}}, {"a", {3, 4}}}), Error);
}

TEST(SeriesFrame, NonFiniteBecomesMissing) {
    auto f = indexed({0, 1, 2}, "a", {1.0, INFINITY, NAN});
    EXPECT_FALSE(f.missing("a", 0));
    EXPECT_TRUE(f.missing("a", 1));
    EXPECT_TRUE(f.missing("a", 2));
    EXPECT_FALSE(f.value_at("a", 1).has_value());
    EXPECT_EQ(*f.value_at("a", 0), 1.0);
}

TEST(SeriesFrame, RowLookupWithGaps) {
    auto f = indexed({2, 5, 9}, "a", {1, 2, 3});
    EXPECT_EQ(f.row_of(5), 1u);
    EXPECT_FALSE(f.row_of(4).has_value());
    EXPECT_FALSE(f.row_of(10).has_value());
    auto s = f.slice({3, 9});
    EXPECT_EQ(s.size(), 2u);
    EXPECT_EQ(s.times()[0], 5);
}

TEST(Csv, ThreeRowEcho) {
    std::istringstream in("date,prcp\n1,0.5\n2,1.5\n3,2.5\n");
    auto f = parse_csv(in, {"date", {"prcp"}});
    EXPECT_EQ(f.size(), 3u);
    EXPECT_EQ(f.column_names(), std::vector<std::string>{"prcp"});
    EXPECT_DOUBLE_EQ(f.column("prcp")[2], 2.5);
}

TEST(Csv, BlankCellIsMissing) {
    std::istringstream in("time,prcp\n1,0.5\n2,\n3,NA\n4,4\n");
    auto f = parse_csv(in, {"time", {"prcp"}});
    EXPECT_FALSE(f.missing("prcp", 0));
    EXPECT_TRUE(f.missing("prcp", 1));
    EXPECT_TRUE(f.missing("prcp", 2));
    EXPECT_DOUBLE_EQ(f.column("prcp")[3], 4.0);
}

TEST(Csv, SortsRowsAndParsesMonths) {
    std::istringstream in("time,a\n2001-03,3\n2001-01,1\n2001-02,2\n");
    auto f = parse_csv(in, {"time", {"a"}});
    ASSERT_TRUE(f.has_calendar());
    EXPECT_EQ(f.times()[0], monthly_timestamp(2001, 1));
    EXPECT_EQ(f.calendar()[2], (CalendarTag{2001, 3}));
    EXPECT_DOUBLE_EQ(f.column("a")[1], 2.0);
}

TEST(Csv, DailyDatesBecomeTradingDayRank) {
    std::istringstream in("time,close\n2020-01-03,2\n2020-01-06,3\n2020-01-02,1\n");
    auto f = parse_csv(in, {"time", {"close"}});
    EXPECT_EQ(std::vector<Timestamp>(f.times().begin(), f.times().end()), (std::vector<Timestamp>{0, 1, 2}));
    EXPECT_DOUBLE_EQ(f.column("close")[2], 3.0);
}

TEST(Csv, DuplicateTimestampNamesIt) {
    std::istringstream in("time,a\n1,1\n7,2\n7,3\n");
    try {
        parse_csv(in, {"time", {"a"}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "schema");
        EXPECT_NE(std::string(e.what()).find('7'), std::string::npos);
    }
}

TEST(Csv, MissingColumnAndMissingFile) {
    std::istringstream in("time,a\n1,1\n");
    EXPECT_EQ(error_code_of([&] { parse_csv(in, {"time", {"b"}}); }), "schema");
    EXPECT_EQ(error_code_of([] { ingest_csv("/nonexistent/file.csv", {"time", {"a"}}); }), "io");
}

TEST(Csv, WriteThenReadRoundTrips) {
    auto f = SeriesFrame({0, 1, 2}, {{"a", {0.1, NAN, 1e-300}}, {"b", {1.0 / 3.0, 2, 3}}});
    std::stringstream buf;
    write_csv(f, buf);
    auto g = parse_csv(buf, {"time", {"a", "b"}});
    EXPECT_EQ(f, g);
}

TEST(Csv, IngestFromFile) {
    auto path = std::filesystem::temp_directory_path() / "mvf_ingest_test.csv";
    {
        std::ofstream out(path);
        out << "time,x,y\n1,1,2\n2,3,4\n";
    }
    auto f = ingest_csv(path.string(), {"time", {"y"}});
    EXPECT_EQ(f.column_names(), std::vector<std::string>{"y"});
    EXPECT_DOUBLE_EQ(f.column("y")[1], 4.0);
    std::filesystem::remove(path);
}

TEST(AlignJoin, SingleInputIsIdentity) {
    auto f = monthly_frame(2000, 1, {1, 2, 3});
    EXPECT_EQ(align_join({f}), f);
}

TEST(AlignJoin, OverlapOfTenOfTwelveMonths) {
    // a covers Jan..Dec 2000, b covers Mar 2000..Feb 2001: common Mar..Dec.
    auto a = monthly_frame(2000, 1, std::vector<double>(12, 1.0), "a");
    auto b = monthly_frame(2000, 3, std::vector<double>(12, 2.0), "b");
    auto j = align_join({a, b});
    EXPECT_EQ(j.size(), 10u);
    EXPECT_EQ(j.times().front(), monthly_timestamp(2000, 3));
    EXPECT_EQ(j.times().back(), monthly_timestamp(2000, 12));
}

TEST(AlignJoin, FourSourcesIntersection) {
    // Common months by hand: a 1..24, b 3..30, c 5..20 minus month 10, d 2..18 -> 5..18 without 10 = 13 rows.
    auto mk = [](const std::string& name, int first, int last, std::optional<int> hole) {
        std::vector<Timestamp> t;
        std::vector<CalendarTag> cal;
        std::vector<double> v;
        for (int m = first; m <= last; ++m) {
            if (hole && *hole == m) {
                continue;
            }
            Timestamp ts = monthly_timestamp(1990, 1) + m - 1;
            t.push_back(ts);
            cal.push_back(calendar_of_monthly(ts));
            v.push_back(m);
        }
        return SeriesFrame(t, {{name, v}}, cal);
    };
    auto j = align_join({mk("prcp", 1, 24, {}), mk("temp", 3, 30, {}), mk("mei", 5, 20, 10), mk("pdo", 2, 18, {})});
    EXPECT_EQ(j.size(), 13u);
    EXPECT_EQ(j.column_names().size(), 4u);
}

TEST(AlignJoin, DuplicateColumnRejected) {
    auto a = monthly_frame(2000, 1, {1, 2}, "x");
    auto b = monthly_frame(2000, 1, {3, 4}, "x");
    EXPECT_THROW(align_join({a, b}), Error);
}

TEST(AlignJoin, EmptyIntersectionNamesRanges) {
    auto a = indexed({0, 1, 2}, "a", {1, 2, 3});
    auto b = indexed({10, 11}, "b", {1, 2});
    try {
        align_join({a, b});
        FAIL();
    } catch (const Error& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("10"), std::string::npos);
        EXPECT_NE(msg.find("2"), std::string::npos);
    }
}

TEST(AlignJoin, OrderIndependent) {
    auto a = SeriesFrame({0, 1, 2, 3, 5}, {{"a", {1, 2, 3, 4, 5}}});
    auto b = SeriesFrame({1, 2, 3, 4, 5}, {{"b", {6, 7, 8, 9, 10}}, {"c", {0, 0, 1, 1, 2}}});
    auto c = SeriesFrame({0, 2, 3, 5}, {{"d", {1, 1, 1, 1}}});
    auto ref = align_join({a, b, c});
    std::vector<SeriesFrame> order{a, b, c};
    std::vector<int> idx{0, 1, 2};
    while (std::next_permutation(idx.begin(), idx.end())) {
        EXPECT_EQ(align_join({order[idx[0]], order[idx[1]], order[idx[2]]}), ref);
    }
}

TEST(MonthlyAnomaly, ConstantSeriesGivesZeros) {
    auto f = monthly_frame(2000, 1, std::vector<double>(30, 4.2));
    auto a = monthly_anomaly(f, "v", {f.times().front(), f.times()[23]});
    for (double v : a.column("v")) {
        EXPECT_DOUBLE_EQ(v, 0.0);
    }
}

TEST(MonthlyAnomaly, JanuaryTwoAndFour) {
    std::vector<double> v(24, 0.0);
    v[0] = 2;
    v[12] = 4;
    auto f = monthly_frame(2000, 1, v);
    auto a = monthly_anomaly(f, "v", {f.times().front(), f.times().back()});
    EXPECT_DOUBLE_EQ(a.column("v")[0], -1.0);
    EXPECT_DOUBLE_EQ(a.column("v")[12], 1.0);
}

TEST(MonthlyAnomaly, UsesTrainRangeOnly) {
    std::vector<double> v(36);
    std::iota(v.begin(), v.end(), 0.0);
    auto f = monthly_frame(2000, 1, v);
    TimeRange train{f.times()[0], f.times()[23]};
    auto means = monthly_means(f, "v", train);
    EXPECT_DOUBLE_EQ(means[0], 6.0); // (0 + 12) / 2
    // Test-range cell equal to its month's train mean has anomaly 0.
    v[24] = means[0];
    auto a = monthly_anomaly(monthly_frame(2000, 1, v), "v", train);
    EXPECT_DOUBLE_EQ(a.column("v")[24], 0.0);
}

TEST(MonthlyAnomaly, MissingMonthInTrainRangeIsNamed) {
    auto f = monthly_frame(2000, 1, std::vector<double>(24, 1.0));
    try {
        monthly_anomaly(f, "v", {f.times()[0], f.times()[10]}); // no December
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("12"), std::string::npos);
    }
}

TEST(MonthlyAnomaly, AddingMeansBackReconstructs) {
    std::vector<double> v;
    for (int i = 0; i < 48; ++i) {
        v.push_back(std::sin(0.7 * i) * 3.3 + 0.1 * i);
    }
    auto f = monthly_frame(1999, 5, v);
    TimeRange train{f.times()[0], f.times()[35]};
    auto means = monthly_means(f, "v", train);
    auto a = monthly_anomaly(f, "v", train);
    for (std::size_t i = 0; i < 36; ++i) {
        int month = f.calendar()[i].month;
        EXPECT_NEAR(a.column("v")[i] + means[month - 1], v[i], 1e-12);
    }
}

TEST(FirstDifference, Examples) {
    auto c = first_difference(indexed({0, 1, 2, 3}, "a", {5, 5, 5, 5}), "a");
    EXPECT_EQ(c.size(), 3u);
    for (double v : c.column("a")) {
        EXPECT_EQ(v, 0.0);
    }
    auto d = first_difference(indexed({0, 1, 2}, "a", {1, 3, 2}), "a");
    EXPECT_EQ(std::vector<double>(d.column("a").begin(), d.column("a").end()), (std::vector<double>{2, -1}));
    auto m = first_difference(indexed({0, 1, 2}, "a", {1, NAN, 2}), "a");
    EXPECT_TRUE(m.missing("a", 0));
    EXPECT_TRUE(m.missing("a", 1));
}

TEST(FirstDifference, TooShort) {
    EXPECT_THROW(first_difference(indexed({0}, "a", {1}), "a"), Error);
}

TEST(FirstDifference, OfCumulativeSumRecoversSeries) {
    std::vector<double> s{0.3, -1.25, 2.5, 7.125, -0.5, 1e-3, 4.0};
    std::vector<double> cs(s.size());
    std::partial_sum(s.begin(), s.end(), cs.begin());
    std::vector<Timestamp> t(s.size());
    std::iota(t.begin(), t.end(), 0);
    auto d = first_difference(indexed(t, "a", cs), "a");
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        EXPECT_NEAR(d.column("a")[i], s[i + 1], 1e-12 * std::max(1.0, std::abs(s[i + 1])));
    }
}
