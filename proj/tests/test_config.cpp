#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "mvf/config.hpp"
#include "mvf/error.hpp"

using namespace mvf;

namespace {

std::string config_error(const std::string& text, const std::string& base = ".") {
    try {
        parse_config(text, base);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "config");
        return e.what();
    }
    ADD_FAILURE() << "config accepted: " << text;
    return "";
}

} // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    auto cfg = parse_config("{}");
    EXPECT_EQ(cfg.seed, 1u);
    EXPECT_EQ(cfg.data.source, DataConfig::Source::Lorenz);
    EXPECT_EQ(cfg.data.lorenz.n_record, 5000u);
    EXPECT_EQ(cfg.hyper.p, 5u);
    EXPECT_EQ(cfg.embedding.max_lag, 30);
    EXPECT_EQ(cfg.infer.replicates, 125u);
    EXPECT_DOUBLE_EQ(cfg.backtest.strategy.cost_frac, 0.003);
}

TEST(Config, ReadsNestedFields) {
    auto cfg = parse_config(R"({
  "seed": 9,
  "data": {"source": "lorenz", "lorenz": {"n_record": 10, "x0": [0.5, 1, 2]}},
  "hyper": {"p": 2, "k_multiplier": 5, "trim_frac": 0.1, "horizon": 3},
  "tune": {"grid": {"p": [1, 2]}, "window_len": 240, "step_len": 24},
  "backtest": {"engine": "linear", "signals": "random", "tax_period": 0}
})");
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.hyper.seed, 9u);
    EXPECT_EQ(cfg.data.lorenz.n_record, 10u);
    EXPECT_EQ(cfg.data.lorenz.x0[0], 0.5);
    EXPECT_EQ(cfg.hyper.p, 2u);
    EXPECT_EQ(cfg.tune.grid.p, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(cfg.tune.grid.trim_frac.size(), 3u); // untouched default
    EXPECT_EQ(cfg.backtest.engine, Engine::GlobalLinear);
    EXPECT_EQ(cfg.backtest.strategy.tax_period, 0u);
}

TEST(Config, UnknownKeyNamesLineAndPath) {
    auto msg = config_error("{\n  \"hyper\": {\n    \"p\": 3,\n    \"kmult\": 5\n  }\n}");
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("hyper.kmult"), std::string::npos) << msg;
}

TEST(Config, WrongTypeNamesLine) {
    auto msg = config_error("{\n  \"seed\": 1,\n  \"hyper\": {\"horizon\": \"twenty\"}\n}");
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("hyper.horizon"), std::string::npos) << msg;
}

TEST(Config, NegativeCountRejected) {
    auto msg = config_error("{\n\"infer\": {\n\"replicates\": -4}}");
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, SyntaxErrorCarriesLine) {
    auto msg = config_error("{\n  \"seed\": 1,\n  \"hyper\": {\"p\": }\n}");
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, SemanticChecks) {
    EXPECT_NE(config_error("{\"hyper\": {\"trim_frac\": 0.6}}").find("hyper"), std::string::npos);
    EXPECT_NE(config_error("{\"data\": {\"source\": \"sql\"}}").find("data.source"), std::string::npos);
    EXPECT_NE(config_error("{\"predict\": {\"engines\": [\"lars\"]}}").find("predict.engines"), std::string::npos);
    EXPECT_NE(config_error("{\"backtest\": {\"signals\": \"psychic\"}}").find("backtest.signals"), std::string::npos);
    EXPECT_NE(config_error("{\"infer\": {\"replicates\": 1}}").find("infer.replicates"), std::string::npos);
    EXPECT_NE(config_error("{\"data\": {\"source\": \"csv\"}}").find("data.files"), std::string::npos);
}

TEST(Config, MissingFileIsReportedAndPathsResolveAgainstConfigDir) {
    auto dir = std::filesystem::temp_directory_path() / "mvf_cfg_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "prcp.csv") << "time,prcp\n2000-01,1\n2000-02,2\n";
    }
    const std::string text = "{\"data\": {\"source\": \"csv\",\n \"files\": [{\"path\": \"prcp.csv\", \"columns\": [\"prcp\"]}]}}";
    auto cfg = parse_config(text, dir.string());
    ASSERT_EQ(cfg.data.files.size(), 1u);
    EXPECT_EQ(cfg.data.files[0].path, (dir / "prcp.csv").string());
    auto frame = load_frame(cfg.data, cfg.seed);
    EXPECT_EQ(frame.size(), 2u);
    auto msg = config_error("{\"data\": {\"source\": \"csv\",\n \"files\": [{\"path\": \"nope.csv\"}]}}", dir.string());
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("nope.csv"), std::string::npos) << msg;
    std::filesystem::remove_all(dir);
}

TEST(Config, ResolvedConfigRoundTrips) {
    auto cfg = parse_config(R"({"seed": 4, "hyper": {"p": 3}, "predict": {"engines": ["stepwise"]},
                               "data": {"anomaly": [{"column": "x", "train": ["2000-01", "2001-12"]}]}})");
    auto again = parse_config(cfg.to_json().dump(2));
    EXPECT_EQ(again.to_json(), cfg.to_json());
    EXPECT_EQ(again.data.anomaly[0].train.first, monthly_timestamp(2000, 1));
}

TEST(Config, LoadFrameSteps) {
    RunConfig cfg;
    cfg.data.source = DataConfig::Source::RandomWalk;
    cfg.data.walk_length = 50;
    auto f = load_frame(cfg.data, 3);
    EXPECT_EQ(f.size(), 50u);
    EXPECT_TRUE(f.has_column("close"));
    EXPECT_EQ(f, load_frame(cfg.data, 3));
    cfg.data.difference = {"close"};
    EXPECT_EQ(load_frame(cfg.data, 3).size(), 49u);
}

TEST(Config, SplitResolution) {
    SplitConfig s;
    RunConfig cfg;
    cfg.data.lorenz.n_record = 100;
    auto f = load_frame(cfg.data, 1);
    auto split = s.resolve(f);
    EXPECT_EQ(split.train, (TimeRange{0, 79}));
    EXPECT_EQ(split.test, (TimeRange{80, 99}));
    s.train_rows = 100;
    EXPECT_THROW(s.resolve(f), Error);
}

TEST(Config, LoadConfigMissingFile) {
    try {
        load_config("/nonexistent/cfg.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "io");
    }
}
