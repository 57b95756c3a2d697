#include "mvf/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>

#include "mvf/error.hpp"

namespace mvf {

using json = nlohmann::ordered_json;

namespace {

using Path = std::vector<std::string>;

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const Path& path, const std::string& msg) const {
        std::string dotted;
        for (const auto& p : path) {
            dotted += dotted.empty() ? p : "." + p;
        }
        throw Error("config", fmt::format("line {}: {}: {}", line_of(path), dotted, msg));
    }

    void check_keys(const json& obj, const Path& path, std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) {
            fail(path, "expected an object");
        }
        for (const auto& [key, _] : obj.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
                auto p = path;
                p.push_back(key);
                fail(p, "unknown key");
            }
        }
    }

    template <typename T>
    void read(const json& obj, const Path& path, const char* key, T& out) const {
        if (!obj.contains(key)) {
            return;
        }
        auto p = path;
        p.push_back(key);
        if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
            if (!obj.at(key).is_number_unsigned()) {
                fail(p, "expected a nonnegative integer");
            }
        }
        try {
            out = obj.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            fail(p, "wrong value type");
        }
    }

    TimeRange time_range(const json& v, const Path& path) const {
        if (!v.is_array() || v.size() != 2) {
            fail(path, "expected [first, last]");
        }
        return {timestamp(v[0], path), timestamp(v[1], path)};
    }

    Timestamp timestamp(const json& v, const Path& path) const {
        if (v.is_number_integer()) {
            return v.get<Timestamp>();
        }
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            int y = 0, m = 0;
            char dash = 0;
            std::istringstream in(s);
            if (s.size() == 7 && (in >> y >> dash >> m) && dash == '-' && m >= 1 && m <= 12) {
                return monthly_timestamp(y, m);
            }
        }
        fail(path, "expected an integer timestamp or \"YYYY-MM\"");
    }

private:
    int line_of(const Path& path) const {
        std::size_t pos = 0;
        for (const auto& key : path) {
            auto found = text_.find("\"" + key + "\"", pos);
            if (found == std::string::npos) {
                break;
            }
            pos = found;
        }
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    }

    const std::string& text_;
};

std::string resolve_path(const std::string& base_dir, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute()) {
        return p;
    }
    return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

json engine_list(const std::vector<Engine>& engines) {
    json out = json::array();
    for (auto e : engines) {
        out.push_back(engine_name(e));
    }
    return out;
}

} // namespace

Split SplitConfig::resolve(const SeriesFrame& frame) const {
    std::size_t n = train_rows ? *train_rows
                               : static_cast<std::size_t>(train_fraction * static_cast<double>(frame.size()));
    if (n < 1 || n >= frame.size()) {
        throw Error("config", fmt::format("split leaves an empty block ({} training rows of {})", n, frame.size()));
    }
    return split_at_row(frame, n);
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::string msg = e.what();
        // nlohmann reports "... at line L, column C: ..."
        throw Error("config", fmt::format("syntax error: {}", msg));
    }
    Reader rd(text);
    rd.check_keys(root, {}, {"seed", "threads", "data", "embedding", "hyper", "split", "predict", "tune", "infer",
                             "backtest"});
    RunConfig cfg;
    rd.read(root, {}, "seed", cfg.seed);
    rd.read(root, {}, "threads", cfg.threads);
    cfg.hyper.seed = cfg.seed;

    if (root.contains("data")) {
        const json& d = root["data"];
        const Path dp{"data"};
        rd.check_keys(d, dp, {"source", "lorenz", "files", "anomaly", "difference", "random_walk"});
        std::string source = "lorenz";
        rd.read(d, dp, "source", source);
        if (source == "lorenz") {
            cfg.data.source = DataConfig::Source::Lorenz;
        } else if (source == "csv") {
            cfg.data.source = DataConfig::Source::Csv;
        } else if (source == "random_walk") {
            cfg.data.source = DataConfig::Source::RandomWalk;
        } else {
            rd.fail({"data", "source"}, "expected lorenz, csv or random_walk");
        }
        if (d.contains("lorenz")) {
            const json& l = d["lorenz"];
            const Path lp{"data", "lorenz"};
            rd.check_keys(l, lp, {"sigma", "rho", "beta", "dt", "subsample", "n_record", "x0", "transient_skip"});
            auto& lz = cfg.data.lorenz;
            rd.read(l, lp, "sigma", lz.sigma);
            rd.read(l, lp, "rho", lz.rho);
            rd.read(l, lp, "beta", lz.beta);
            rd.read(l, lp, "dt", lz.dt);
            rd.read(l, lp, "subsample", lz.subsample);
            rd.read(l, lp, "n_record", lz.n_record);
            rd.read(l, lp, "x0", lz.x0);
            rd.read(l, lp, "transient_skip", lz.transient_skip);
        }
        if (d.contains("files")) {
            if (!d["files"].is_array()) {
                rd.fail({"data", "files"}, "expected an array");
            }
            for (const auto& f : d["files"]) {
                const Path fp{"data", "files"};
                rd.check_keys(f, fp, {"path", "time", "columns"});
                CsvInput in;
                rd.read(f, fp, "path", in.path);
                rd.read(f, fp, "time", in.time_column);
                rd.read(f, fp, "columns", in.columns);
                if (in.path.empty()) {
                    rd.fail({"data", "files", "path"}, "missing path");
                }
                in.path = resolve_path(base_dir, in.path);
                if (!std::filesystem::exists(in.path)) {
                    rd.fail({"data", "files", "path"}, fmt::format("file '{}' does not exist", in.path));
                }
                cfg.data.files.push_back(std::move(in));
            }
        }
        if (d.contains("anomaly")) {
            for (const auto& a : d["anomaly"]) {
                const Path ap{"data", "anomaly"};
                rd.check_keys(a, ap, {"column", "train"});
                AnomalyStep step;
                rd.read(a, ap, "column", step.column);
                if (!a.contains("train")) {
                    rd.fail(ap, "missing train range");
                }
                step.train = rd.time_range(a["train"], {"data", "anomaly", "train"});
                cfg.data.anomaly.push_back(std::move(step));
            }
        }
        rd.read(d, dp, "difference", cfg.data.difference);
        if (d.contains("random_walk")) {
            const json& w = d["random_walk"];
            const Path wp{"data", "random_walk"};
            rd.check_keys(w, wp, {"n", "drift", "vol", "start"});
            rd.read(w, wp, "n", cfg.data.walk_length);
            rd.read(w, wp, "drift", cfg.data.walk_drift);
            rd.read(w, wp, "vol", cfg.data.walk_vol);
            rd.read(w, wp, "start", cfg.data.walk_start);
        }
        if (cfg.data.source == DataConfig::Source::Csv && cfg.data.files.empty()) {
            rd.fail({"data", "files"}, "csv source needs at least one file");
        }
    }

    if (root.contains("embedding")) {
        const json& e = root["embedding"];
        const Path ep{"embedding"};
        rd.check_keys(e, ep, {"series", "max_lag", "min_lag", "target"});
        rd.read(e, ep, "series", cfg.embedding.series);
        rd.read(e, ep, "max_lag", cfg.embedding.max_lag);
        rd.read(e, ep, "min_lag", cfg.embedding.min_lag);
        rd.read(e, ep, "target", cfg.embedding.target);
    }
    if (root.contains("hyper")) {
        const json& h = root["hyper"];
        const Path hp{"hyper"};
        rd.check_keys(h, hp, {"p", "k_multiplier", "trim_frac", "horizon", "q", "n_partitions"});
        rd.read(h, hp, "p", cfg.hyper.p);
        rd.read(h, hp, "k_multiplier", cfg.hyper.k_multiplier);
        rd.read(h, hp, "trim_frac", cfg.hyper.trim_frac);
        rd.read(h, hp, "horizon", cfg.hyper.horizon);
        rd.read(h, hp, "q", cfg.hyper.q);
        rd.read(h, hp, "n_partitions", cfg.hyper.n_partitions);
        try {
            cfg.hyper.validate();
        } catch (const Error& err) {
            rd.fail(hp, err.what());
        }
    }
    if (root.contains("split")) {
        const json& s = root["split"];
        const Path sp{"split"};
        rd.check_keys(s, sp, {"train_rows", "train_fraction"});
        if (s.contains("train_rows")) {
            std::size_t n = 0;
            rd.read(s, sp, "train_rows", n);
            cfg.split.train_rows = n;
        }
        rd.read(s, sp, "train_fraction", cfg.split.train_fraction);
    }
    if (root.contains("predict")) {
        const json& p = root["predict"];
        const Path pp{"predict"};
        rd.check_keys(p, pp, {"engines", "per_map", "residual_overlay", "rescale", "interval_level", "max_terms"});
        if (p.contains("engines")) {
            std::vector<std::string> names;
            rd.read(p, pp, "engines", names);
            cfg.predict.engines.clear();
            for (const auto& n : names) {
                try {
                    cfg.predict.engines.push_back(parse_engine(n));
                } catch (const Error& err) {
                    rd.fail({"predict", "engines"}, err.what());
                }
            }
        }
        rd.read(p, pp, "per_map", cfg.predict.per_map);
        rd.read(p, pp, "residual_overlay", cfg.predict.residual_overlay);
        rd.read(p, pp, "rescale", cfg.predict.rescale);
        rd.read(p, pp, "interval_level", cfg.predict.interval_level);
        rd.read(p, pp, "max_terms", cfg.predict.max_terms);
    }
    if (root.contains("tune")) {
        const json& t = root["tune"];
        const Path tp{"tune"};
        rd.check_keys(t, tp, {"grid", "window_len", "step_len"});
        if (t.contains("grid")) {
            const json& g = t["grid"];
            const Path gp{"tune", "grid"};
            rd.check_keys(g, gp, {"p", "k_multiplier", "trim_frac"});
            rd.read(g, gp, "p", cfg.tune.grid.p);
            rd.read(g, gp, "k_multiplier", cfg.tune.grid.k_multiplier);
            rd.read(g, gp, "trim_frac", cfg.tune.grid.trim_frac);
        }
        rd.read(t, tp, "window_len", cfg.tune.window_len);
        rd.read(t, tp, "step_len", cfg.tune.step_len);
    }
    if (root.contains("infer")) {
        const json& i = root["infer"];
        const Path ip{"infer"};
        rd.check_keys(i, ip, {"replicates", "n_mc"});
        rd.read(i, ip, "replicates", cfg.infer.replicates);
        rd.read(i, ip, "n_mc", cfg.infer.n_mc);
        if (cfg.infer.replicates < 2) {
            rd.fail({"infer", "replicates"}, "needs at least 2 replicates");
        }
    }
    if (root.contains("backtest")) {
        const json& b = root["backtest"];
        const Path bp{"backtest"};
        rd.check_keys(b, bp, {"cost_frac", "tax_rate", "tax_period", "initial_value", "carry_forward_losses",
                              "engine", "price_column", "signals"});
        auto& s = cfg.backtest.strategy;
        rd.read(b, bp, "cost_frac", s.cost_frac);
        rd.read(b, bp, "tax_rate", s.tax_rate);
        rd.read(b, bp, "tax_period", s.tax_period);
        rd.read(b, bp, "initial_value", s.initial_value);
        rd.read(b, bp, "carry_forward_losses", s.carry_forward_losses);
        std::string engine = engine_name(cfg.backtest.engine);
        rd.read(b, bp, "engine", engine);
        try {
            cfg.backtest.engine = parse_engine(engine);
        } catch (const Error& err) {
            rd.fail({"backtest", "engine"}, err.what());
        }
        rd.read(b, bp, "price_column", cfg.backtest.price_column);
        rd.read(b, bp, "signals", cfg.backtest.signals);
        if (cfg.backtest.signals != "model" && cfg.backtest.signals != "always_in" &&
            cfg.backtest.signals != "random") {
            rd.fail({"backtest", "signals"}, "expected model, always_in or random");
        }
        try {
            s.validate();
        } catch (const Error& err) {
            rd.fail(bp, err.what());
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("io", fmt::format("cannot open config '{}'", path));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    auto dir = std::filesystem::path(path).parent_path().string();
    return parse_config(ss.str(), dir.empty() ? "." : dir);
}

nlohmann::ordered_json RunConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["threads"] = threads;
    json d;
    switch (data.source) {
    case DataConfig::Source::Lorenz: d["source"] = "lorenz"; break;
    case DataConfig::Source::Csv: d["source"] = "csv"; break;
    case DataConfig::Source::RandomWalk: d["source"] = "random_walk"; break;
    }
    const auto& lz = data.lorenz;
    d["lorenz"] = {{"sigma", lz.sigma}, {"rho", lz.rho},   {"beta", lz.beta},
                   {"dt", lz.dt},       {"subsample", lz.subsample}, {"n_record", lz.n_record},
                   {"x0", lz.x0},       {"transient_skip", lz.transient_skip}};
    d["files"] = json::array();
    for (const auto& f : data.files) {
        d["files"].push_back({{"path", f.path}, {"time", f.time_column}, {"columns", f.columns}});
    }
    d["anomaly"] = json::array();
    for (const auto& a : data.anomaly) {
        d["anomaly"].push_back({{"column", a.column}, {"train", {a.train.first, a.train.last}}});
    }
    d["difference"] = data.difference;
    d["random_walk"] = {{"n", data.walk_length},
                        {"drift", data.walk_drift},
                        {"vol", data.walk_vol},
                        {"start", data.walk_start}};
    j["data"] = d;
    j["embedding"] = {{"series", embedding.series},
                      {"max_lag", embedding.max_lag},
                      {"min_lag", embedding.min_lag},
                      {"target", embedding.target}};
    j["hyper"] = {{"p", hyper.p},
                  {"k_multiplier", hyper.k_multiplier},
                  {"trim_frac", hyper.trim_frac},
                  {"horizon", hyper.horizon},
                  {"q", hyper.q},
                  {"n_partitions", hyper.n_partitions}};
    json s;
    if (split.train_rows) {
        s["train_rows"] = *split.train_rows;
    }
    s["train_fraction"] = split.train_fraction;
    j["split"] = s;
    j["predict"] = {{"engines", engine_list(predict.engines)},
                    {"per_map", predict.per_map},
                    {"residual_overlay", predict.residual_overlay},
                    {"rescale", predict.rescale},
                    {"interval_level", predict.interval_level},
                    {"max_terms", predict.max_terms}};
    j["tune"] = {{"grid", {{"p", tune.grid.p}, {"k_multiplier", tune.grid.k_multiplier}, {"trim_frac", tune.grid.trim_frac}}},
                 {"window_len", tune.window_len},
                 {"step_len", tune.step_len}};
    j["infer"] = {{"replicates", infer.replicates}, {"n_mc", infer.n_mc}};
    j["backtest"] = {{"cost_frac", backtest.strategy.cost_frac},
                     {"tax_rate", backtest.strategy.tax_rate},
                     {"tax_period", backtest.strategy.tax_period},
                     {"initial_value", backtest.strategy.initial_value},
                     {"carry_forward_losses", backtest.strategy.carry_forward_losses},
                     {"engine", engine_name(backtest.engine)},
                     {"price_column", backtest.price_column},
                     {"signals", backtest.signals}};
    return j;
}

SeriesFrame load_frame(const DataConfig& data, std::uint64_t seed) {
    SeriesFrame frame;
    switch (data.source) {
    case DataConfig::Source::Lorenz: frame = lorenz_trajectory(data.lorenz); break;
    case DataConfig::Source::RandomWalk: {
        auto prices = geometric_random_walk(data.walk_length, data.walk_drift, data.walk_vol, seed, data.walk_start);
        std::vector<Timestamp> times(prices.size());
        for (std::size_t i = 0; i < times.size(); ++i) {
            times[i] = static_cast<Timestamp>(i);
        }
        frame = SeriesFrame(std::move(times), {{"close", std::move(prices)}});
        break;
    }
    case DataConfig::Source::Csv: {
        std::vector<SeriesFrame> frames;
        for (const auto& f : data.files) {
            frames.push_back(ingest_csv(f.path, {f.time_column, f.columns}));
        }
        frame = align_join(frames);
        break;
    }
    }
    for (const auto& a : data.anomaly) {
        frame = monthly_anomaly(frame, a.column, a.train);
    }
    for (const auto& c : data.difference) {
        frame = first_difference(frame, c);
    }
    return frame;
}

} // namespace mvf
