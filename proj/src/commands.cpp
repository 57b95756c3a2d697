#include "mvf/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "mvf/config.hpp"
#include "mvf/error.hpp"
#include "mvf/inference.hpp"
#include "mvf/stats.hpp"
#include "mvf/svg.hpp"

namespace mvf::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class Output {
public:
    explicit Output(std::string dir) : dir_(std::move(dir)) {
        if (dir_.empty()) {
            throw Error("usage", "--out is required");
        }
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            throw Error("io", fmt::format("cannot create output directory '{}': {}", dir_, ec.message()));
        }
    }

    template <typename Fn>
    void write(const std::string& name, Fn&& fill) const {
        const auto path = (fs::path(dir_) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw Error("io", fmt::format("cannot write '{}'", path));
        }
        fill(out);
        out.flush();
        if (!out) {
            throw Error("io", fmt::format("write failed for '{}'", path));
        }
    }

    void text(const std::string& name, const std::string& body) const {
        write(name, [&](std::ostream& o) { o << body; });
    }

private:
    std::string dir_;
};

RunConfig resolve(const CommandArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
    if (args.seed) {
        cfg.seed = *args.seed;
        cfg.hyper.seed = *args.seed;
    }
    if (args.threads) {
        cfg.threads = *args.threads;
    }
    return cfg;
}

EnsembleOptions ensemble_options(const RunConfig& cfg, Engine engine) {
    EnsembleOptions o;
    o.engine = engine;
    o.threads = cfg.threads;
    o.max_terms = cfg.predict.max_terms;
    return o;
}

json hyper_json(const HyperParams& hp) {
    return {{"p", hp.p},         {"k_multiplier", hp.k_multiplier}, {"trim_frac", hp.trim_frac},
            {"horizon", hp.horizon}, {"q", hp.q},                     {"n_partitions", hp.n_partitions},
            {"seed", hp.seed}};
}

json skill_json(const Skill& s) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"correlation", num(s.correlation)}, {"mse", num(s.mse)}, {"n", s.n}};
}

std::string range_text(const SeriesFrame& frame, const TimeRange& r) {
    if (frame.has_calendar()) {
        auto a = frame.calendar()[*frame.row_of(r.first)];
        auto b = frame.calendar()[*frame.row_of(r.last)];
        return fmt::format("{:04d}-{:02d}..{:04d}-{:02d}", a.year, a.month, b.year, b.month);
    }
    return fmt::format("{}..{}", r.first, r.last);
}

// ---------------------------------------------------------------------------

void cmd_lorenz(const RunConfig& cfg, const Output& out, std::ostream& log) {
    const SeriesFrame frame = lorenz_trajectory(cfg.data.lorenz);
    out.write("trajectory.csv", [&](std::ostream& o) { write_csv(frame, o); });
    log << "rows: " << frame.size() << '\n';
}

void cmd_predict(const RunConfig& cfg, const Output& out, std::ostream& log) {
    const SeriesFrame frame = load_frame(cfg.data, cfg.seed);
    const Split split = cfg.split.resolve(frame);
    log << fmt::format("train {} ({} rows), test {}\n", range_text(frame, split.train),
                       frame.slice(split.train).size(), range_text(frame, split.test));

    std::optional<ResidualPool> pool;
    if (cfg.predict.residual_overlay) {
        pool = residual_pool(frame.slice(split.train), cfg.embedding, cfg.hyper, ensemble_options(cfg, Engine::LocalLinear));
        log << fmt::format("residual pool: {} residuals from {} maps\n", pool->size(), pool->spec_count);
    }

    json summary;
    summary["hyper"] = hyper_json(cfg.hyper);
    std::vector<svg::Panel> panels;
    for (Engine engine : cfg.predict.engines) {
        PredictionSet set = ensemble_predict(frame, cfg.embedding, cfg.hyper, split, ensemble_options(cfg, engine));
        std::vector<double> draws;
        if (pool) {
            draws.reserve(set.size());
            for (std::size_t i = 0; i < set.size(); ++i) {
                draws.push_back(set.combined[i] + pool->residuals[(i * 7919) % pool->size()]);
            }
        }
        if (cfg.predict.rescale && pool) {
            std::vector<double> finite_draws;
            for (double d : draws) {
                if (std::isfinite(d)) {
                    finite_draws.push_back(d);
                }
            }
            set.combined = rescale_to_pool_range(set.combined, finite_draws);
        }
        const std::string name = engine_name(engine);
        out.write(fmt::format("predictions_{}.csv", name),
                  [&](std::ostream& o) { write_predictions_csv(set, o, cfg.predict.per_map); });
        const Skill skill = skill_of(set);
        summary["engines"][name] = skill_json(skill);
        summary["engines"][name]["maps"] = set.per_map.rows();
        summary["engines"][name]["skipped_maps"] = set.skipped_specs;
        summary["engines"][name]["ridge_fits"] = set.ridge_fits;
        log << fmt::format("{}: r={:.4f} mse={:.6g} n={} maps={} skipped={}\n", name, skill.correlation, skill.mse,
                           skill.n, set.per_map.rows(), set.skipped_specs);

        svg::Panel panel;
        panel.title = fmt::format("{} (r = {:.3f})", name == std::string("local") ? "local linear" : name,
                                  skill.correlation);
        panel.x_label = "prediction";
        panel.y_label = "observed";
        panel.diagonal = true;
        panel.series.push_back({"", set.combined, set.truth, "black"});
        if (pool) {
            panel.series.push_back({"residual cloud", set.combined, draws, "#1f4fd8", false, 1.2});
            out.write(fmt::format("intervals_{}.csv", name), [&](std::ostream& o) {
                o << fmt::format("time,truth,prediction,lo,hi\n");
                for (std::size_t i = 0; i < set.size(); ++i) {
                    const auto iv = predictive_interval(set.combined[i], *pool, cfg.predict.interval_level);
                    o << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g}\n", set.base_times[i] + set.horizon,
                                     set.truth[i], set.combined[i], iv.lo, iv.hi);
                }
            });
        }
        panels.push_back(std::move(panel));
    }
    out.text("scatter.svg", svg::render(panels));
    out.text("predict-summary.json", summary.dump(2) + "\n");
}

void cmd_tune(const RunConfig& cfg, const Output& out, std::ostream& log) {
    const SeriesFrame frame = load_frame(cfg.data, cfg.seed);
    const EnsembleOptions opts = ensemble_options(cfg, Engine::LocalLinear);
    json result;
    if (cfg.tune.window_len > 0) {
        const RollingResult run = rolling_origin_run(frame, cfg.embedding, cfg.hyper, cfg.tune.grid,
                                                     cfg.tune.window_len, cfg.tune.step_len, opts);
        json windows = json::array();
        for (std::size_t b = 0; b < run.blocks.size(); ++b) {
            const std::size_t start = run.window_starts[b];
            const SeriesFrame win = frame.slice_rows(start, start + cfg.tune.window_len);
            const Split split = split_at_row(win, cfg.tune.window_len - cfg.tune.step_len);
            const Skill skill = skill_of(run.blocks[b]);
            log << fmt::format("window {}: train {} ({} rows) test {} ({} rows) using p={} k_mult={} trim={} -> "
                               "r={:.4f}\n",
                               b + 1, range_text(frame, split.train), cfg.tune.window_len - cfg.tune.step_len,
                               range_text(frame, split.test), cfg.tune.step_len, run.used[b].p,
                               run.used[b].k_multiplier, run.used[b].trim_frac, skill.correlation);
            windows.push_back({{"start_row", start}, {"hyper", hyper_json(run.used[b])}, {"skill", skill_json(skill)}});
        }
        out.write("predictions_rolling.csv", [&](std::ostream& o) { write_predictions_csv(run.combined, o); });
        result["windows"] = windows;
        result["selected"] = hyper_json(run.next.value_or(cfg.hyper));
    } else {
        const Split split = cfg.split.resolve(frame);
        log << fmt::format("train {} test {}\n", range_text(frame, split.train), range_text(frame, split.test));
        const CvResult cv = cross_validate(frame, cfg.embedding, cfg.hyper, cfg.tune.grid, split, opts);
        out.write("tune-grid.csv", [&](std::ostream& o) {
            o << "p,k_multiplier,trim_frac,mse\n";
            for (const auto& c : cv.cells) {
                o << fmt::format("{},{},{},{}\n", c.hp.p, c.hp.k_multiplier, c.hp.trim_frac,
                                 std::isfinite(c.mse) ? fmt::format("{:.17g}", c.mse) : std::string("NA"));
            }
        });
        result["selected"] = hyper_json(cv.best);
    }
    const auto& sel = result["selected"];
    log << fmt::format("selected p={} k_multiplier={} trim_frac={}\n", sel["p"].get<std::size_t>(),
                       sel["k_multiplier"].get<double>(), sel["trim_frac"].get<double>());
    out.text("selected-hyperparams.json", result.dump(2) + "\n");
}

void cmd_infer(const RunConfig& cfg, const Output& out, std::ostream& log) {
    const SeriesFrame frame = load_frame(cfg.data, cfg.seed);
    const Split split = cfg.split.resolve(frame);
    HyperParams hp = cfg.hyper;
    hp.n_partitions = 1;
    const ResampleReport rep = resample_correlations(frame, cfg.embedding, hp, split, cfg.infer.replicates, cfg.seed,
                                                     ensemble_options(cfg, Engine::LocalLinear), cfg.infer.n_mc);
    out.write("correlations.csv", [&](std::ostream& o) { write_correlations_csv(rep, o); });
    out.write("qq.csv", [&](std::ostream& o) { write_qq_csv(rep, o); });
    out.write("summary.json", [&](std::ostream& o) { write_summary_json(rep, o); });

    svg::Panel panel;
    panel.title = fmt::format("{} resampled correlations", rep.correlations.size());
    panel.x_label = "standard normal quantile";
    panel.y_label = "standardized correlation";
    panel.diagonal = true;
    svg::Series pts;
    pts.color = "black";
    pts.radius = 2.2;
    for (const auto& [t, e] : rep.qq_pairs) {
        pts.x.push_back(t);
        pts.y.push_back(e);
    }
    panel.series.push_back(std::move(pts));
    out.text("qq.svg", svg::render({panel}));
    log << fmt::format("replicates={} mean={:.4f} sd={:.4f} ks_p={:.3f} bound={:.3f}+/-{:.3f}\n",
                       rep.correlations.size(), rep.mean, rep.sd, rep.ks_p, rep.bound_center, rep.bound_halfwidth);
}

void cmd_backtest(const RunConfig& cfg, const Output& out, std::ostream& log) {
    const SeriesFrame frame = load_frame(cfg.data, cfg.seed);
    const std::string& col = cfg.backtest.price_column;
    const auto prices_all = frame.column(col);

    // Position for day d is decided at d's close from the predicted change d -> d+1.
    const SeriesFrame changes = first_difference(frame, col);
    const Split split = cfg.split.resolve(changes);
    const auto first_day = *frame.row_of(split.test.first);
    std::vector<double> prices(prices_all.begin() + static_cast<std::ptrdiff_t>(first_day), prices_all.end());
    std::vector<Timestamp> times(frame.times().begin() + static_cast<std::ptrdiff_t>(first_day), frame.times().end());
    for (double p : prices) {
        if (is_missing(p)) {
            throw Error("precondition", "price series has missing values in the trading block");
        }
    }

    std::vector<double> predicted(prices.size(), 0.0);
    if (cfg.backtest.signals == "model") {
        const PredictionSet set =
            ensemble_predict(changes, cfg.embedding, cfg.hyper, split, ensemble_options(cfg, cfg.backtest.engine));
        for (std::size_t i = 0; i < set.size(); ++i) {
            const auto day = frame.row_of(set.base_times[i] + set.horizon);
            if (day && *day >= first_day && std::isfinite(set.combined[i])) {
                predicted[*day - first_day] = set.combined[i];
            }
        }
        log << fmt::format("{}: r={:.4f} on {} days\n", engine_name(cfg.backtest.engine), skill_of(set).correlation,
                           set.size());
    } else if (cfg.backtest.signals == "always_in") {
        std::fill(predicted.begin(), predicted.end(), 1.0);
    } else {
        std::mt19937_64 rng(cfg.seed);
        std::bernoulli_distribution coin(0.5);
        for (auto& p : predicted) {
            p = coin(rng) ? 1.0 : -1.0;
        }
    }
    const auto positions = signal_from_predictions(predicted);

    StrategyConfig no_tax = cfg.backtest.strategy;
    no_tax.tax_rate = 0.0;
    const Ledger strategy = run_backtest(prices, positions, no_tax, times);
    const Ledger taxed = run_backtest(prices, positions, cfg.backtest.strategy, times);
    const Ledger hold = buy_and_hold(prices, no_tax, times);
    out.write("ledger_strategy.csv", [&](std::ostream& o) { write_ledger_csv(strategy, o); });
    out.write("ledger_strategy_taxed.csv", [&](std::ostream& o) { write_ledger_csv(taxed, o); });
    out.write("ledger_buy_hold.csv", [&](std::ostream& o) { write_ledger_csv(hold, o); });

    auto curve = [&](const Ledger& l) {
        std::vector<double> x(l.times.begin(), l.times.end());
        return std::pair{x, l.value};
    };
    svg::Panel panel;
    panel.title = "value of 1 unit invested";
    panel.x_label = "trading day";
    panel.y_label = "value";
    auto [hx, hy] = curve(hold);
    svg::Series hold_dots{"buy and hold", {}, {}, "black", false, 2.2};
    const std::size_t stride = std::max<std::size_t>(1, cfg.backtest.strategy.tax_period);
    for (std::size_t i = 0; i < hx.size(); i += stride) {
        hold_dots.x.push_back(hx[i]);
        hold_dots.y.push_back(hy[i]);
    }
    hold_dots.x.push_back(hx.back());
    hold_dots.y.push_back(hy.back());
    auto [sx, sy] = curve(strategy);
    auto [tx, ty] = curve(taxed);
    panel.series.push_back(hold_dots);
    panel.series.push_back({"timing, costs", sx, sy, "#c0392b", true});
    panel.series.push_back({"timing, costs and tax", tx, ty, "#27ae60", true});
    out.text("equity.svg", svg::render({panel}, 640, 380));

    json summary;
    summary["days"] = prices.size();
    summary["buy_and_hold"] = hold.final_value();
    summary["strategy"] = {{"final_value", strategy.final_value()}, {"trades", strategy.trades},
                           {"costs_paid", strategy.costs_paid.back()}};
    summary["strategy_taxed"] = {{"final_value", taxed.final_value()}, {"taxes_paid", taxed.taxes_paid.back()}};
    out.text("backtest-summary.json", summary.dump(2) + "\n");
    log << fmt::format("days={} buy_and_hold={:.4f} strategy={:.4f} (trades={}) taxed={:.4f}\n", prices.size(),
                       hold.final_value(), strategy.final_value(), strategy.trades, taxed.final_value());
}

} // namespace

int run(const std::string& command, const CommandArgs& args, std::ostream& log, std::ostream& err) {
    try {
        const RunConfig cfg = resolve(args);
        const Output out(args.out_dir);
        out.text("resolved-config.json", cfg.to_json().dump(2) + "\n");
        if (command == "lorenz") {
            cmd_lorenz(cfg, out, log);
        } else if (command == "predict") {
            cmd_predict(cfg, out, log);
        } else if (command == "tune") {
            cmd_tune(cfg, out, log);
        } else if (command == "infer") {
            cmd_infer(cfg, out, log);
        } else if (command == "backtest") {
            cmd_backtest(cfg, out, log);
        } else {
            throw Error("usage", fmt::format("unknown command '{}'", command));
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.code() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return 3;
    }
}

} // namespace mvf::cli
