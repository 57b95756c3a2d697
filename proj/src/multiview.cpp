#include "mvf/multiview.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <tuple>

#include <fmt/format.h>

#include "mvf/error.hpp"
#include "mvf/parallel.hpp"
#include "mvf/stats.hpp"

namespace mvf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string spec_label(const DelayMapSpec& spec) {
    std::string s;
    for (const auto& c : spec.coords) {
        if (!s.empty()) {
            s += ' ';
        }
        s += fmt::format("{}@{}", c.series, c.lag);
    }
    return s;
}

} // namespace

void HyperParams::validate() const {
    require(p >= 1, "hyperparameter p must be >= 1");
    require(k_multiplier > 0, "k_multiplier must be positive");
    require(trim_frac >= 0 && trim_frac < 0.5, "trim_frac must lie in [0, 0.5)");
    require(horizon >= 1, fmt::format("horizon must be >= 1 (got {})", horizon));
    require(q > 0 && q < 1, "q must lie in (0, 1)");
    require(n_partitions >= 1, "n_partitions must be >= 1");
}

const char* engine_name(Engine e) {
    switch (e) {
    case Engine::LocalLinear: return "local";
    case Engine::GlobalLinear: return "linear";
    case Engine::ForwardSelect: return "stepwise";
    }
    return "?";
}

Engine parse_engine(const std::string& name) {
    if (name == "local") {
        return Engine::LocalLinear;
    }
    if (name == "linear") {
        return Engine::GlobalLinear;
    }
    if (name == "stepwise") {
        return Engine::ForwardSelect;
    }
    throw Error("config", fmt::format("unknown engine '{}' (expected local, linear or stepwise)", name));
}

Split split_at_row(const SeriesFrame& frame, std::size_t n_train) {
    require(n_train >= 1 && n_train < frame.size(), "split needs a nonempty training and test block");
    auto t = frame.times();
    return {{t.front(), t[n_train - 1]}, {t[n_train], t.back()}};
}

double trimmed_mean(std::span<const double> values, double trim_frac) {
    require(!values.empty(), "trimmed mean of an empty list");
    require(trim_frac >= 0 && trim_frac < 0.5, "trim_frac must lie in [0, 0.5)");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const auto drop = static_cast<std::size_t>(std::floor(trim_frac * static_cast<double>(v.size())));
    double s = 0.0;
    for (std::size_t i = drop; i < v.size() - drop; ++i) {
        s += v[i];
    }
    return s / static_cast<double>(v.size() - 2 * drop);
}

std::vector<Partition> draw_partitions(const PoolSpec& pool, const HyperParams& hp) {
    const auto coords = pool.coordinates();
    std::vector<Partition> out;
    for (std::size_t i = 0; i < hp.n_partitions; ++i) {
        const std::uint64_t seed = hp.seed + static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ULL;
        out.push_back(sample_disjoint_partition(coords, hp.p, {pool.target, hp.horizon}, seed));
    }
    return out;
}

std::vector<Timestamp> query_base_times(const SeriesFrame& frame, const TimeRange& test, int horizon) {
    std::vector<Timestamp> out;
    for (auto t : frame.times()) {
        if (test.contains(t)) {
            out.push_back(t - horizon);
        }
    }
    return out;
}

PredictionSet ensemble_predict_specs(const SeriesFrame& frame, const std::vector<DelayMapSpec>& specs,
                                     const HyperParams& hp, const TimeRange& train_range,
                                     std::span<const Timestamp> query_times, const EnsembleOptions& opts) {
    hp.validate();
    require(!specs.empty(), "ensemble needs at least one delay map");
    const SeriesFrame train = frame.slice(train_range);
    for (auto b : query_times) {
        require(b + hp.horizon > train_range.last,
                fmt::format("query base time {} targets the training block", b));
    }
    const std::size_t nq = query_times.size();
    const std::size_t nspec = specs.size();

    RowMatrix per_map = RowMatrix::Constant(static_cast<Eigen::Index>(nspec), static_cast<Eigen::Index>(nq), kNaN);
    RowMatrix residuals = per_map;
    std::vector<char> usable(nspec, 0);
    std::vector<std::size_t> ridge(nspec, 0);

    parallel_for(nspec, opts.threads, [&](std::size_t s) {
        const DelayMapSpec& spec = specs[s];
        require(spec.target.horizon == hp.horizon, "delay map horizon differs from hyperparameters");
        DesignMatrix design;
        try {
            design = build_design(train, spec);
        } catch (const Error&) {
            return; // no complete rows: skipped
        }
        const std::size_t k = neighbor_count(hp.k_multiplier, train.size(), spec.dimension());
        const auto row = static_cast<Eigen::Index>(s);
        if (opts.engine == Engine::LocalLinear) {
            if (design.rows() < k) {
                return;
            }
            LocalLinearRegressor reg(design);
            for (std::size_t q = 0; q < nq; ++q) {
                auto x = delay_vector(frame, spec, query_times[q]);
                if (!x) {
                    continue;
                }
                auto pred = reg.predict(*x, k, opts.ridge_eps);
                per_map(row, static_cast<Eigen::Index>(q)) = pred.prediction;
                residuals(row, static_cast<Eigen::Index>(q)) = pred.nn_residual;
                ridge[s] += pred.ridge_used ? 1 : 0;
            }
        } else {
            if (design.rows() < spec.dimension() + 2) {
                return;
            }
            LinearModel model = opts.engine == Engine::GlobalLinear
                                    ? global_linear_fit(design)
                                    : forward_select_fit(design, opts.max_terms == 0
                                                                     ? spec.dimension()
                                                                     : std::min(opts.max_terms, spec.dimension()));
            ridge[s] = model.ridge_used ? 1 : 0;
            for (std::size_t q = 0; q < nq; ++q) {
                if (auto x = delay_vector(frame, spec, query_times[q])) {
                    per_map(row, static_cast<Eigen::Index>(q)) = model.predict(*x);
                }
            }
        }
        usable[s] = 1;
    });

    PredictionSet out;
    out.horizon = hp.horizon;
    out.base_times.assign(query_times.begin(), query_times.end());
    std::vector<Eigen::Index> kept;
    for (std::size_t s = 0; s < nspec; ++s) {
        if (usable[s]) {
            kept.push_back(static_cast<Eigen::Index>(s));
            out.map_labels.push_back(spec_label(specs[s]));
            out.ridge_fits += ridge[s];
        } else {
            ++out.skipped_specs;
        }
    }
    if (kept.empty()) {
        throw Error("insufficient-data",
                    fmt::format("all {} delay maps were skipped (too few complete training rows)", nspec));
    }
    out.per_map = per_map(kept, Eigen::all);
    if (opts.engine == Engine::LocalLinear) {
        out.nn_residuals = residuals(kept, Eigen::all);
    }

    const std::string& target = specs.front().target.series;
    out.combined.resize(nq);
    out.truth.resize(nq);
    std::vector<double> col;
    for (std::size_t q = 0; q < nq; ++q) {
        col.clear();
        for (Eigen::Index m = 0; m < out.per_map.rows(); ++m) {
            const double v = out.per_map(m, static_cast<Eigen::Index>(q));
            if (!is_missing(v)) {
                col.push_back(v);
            }
        }
        out.combined[q] = col.empty() ? kNaN : trimmed_mean(col, hp.trim_frac);
        out.truth[q] = frame.value_at(target, query_times[q] + hp.horizon).value_or(kNaN);
    }
    return out;
}

PredictionSet ensemble_predict(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                               const TimeRange& train_range, std::span<const Timestamp> query_times,
                               const EnsembleOptions& opts) {
    hp.validate();
    std::vector<DelayMapSpec> specs;
    for (auto& part : draw_partitions(pool, hp)) {
        for (auto& spec : part.specs) {
            specs.push_back(std::move(spec));
        }
    }
    return ensemble_predict_specs(frame, specs, hp, train_range, query_times, opts);
}

PredictionSet ensemble_predict(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                               const Split& split, const EnsembleOptions& opts) {
    hp.validate();
    const auto queries = query_base_times(frame, split.test, hp.horizon);
    return ensemble_predict(frame, pool, hp, split.train, queries, opts);
}

Skill skill_of(const PredictionSet& set) {
    Skill s;
    s.correlation = stats::pearson(set.combined, set.truth);
    s.mse = stats::mse(set.combined, set.truth);
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (std::isfinite(set.combined[i]) && std::isfinite(set.truth[i])) {
            ++s.n;
        }
    }
    return s;
}

CvResult cross_validate(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& base,
                        const HyperGrid& grid, const Split& split, const EnsembleOptions& opts) {
    require(!grid.p.empty() && !grid.k_multiplier.empty() && !grid.trim_frac.empty(), "tuning grid is empty");
    auto ps = grid.p;
    auto ks = grid.k_multiplier;
    auto ts = grid.trim_frac;
    std::sort(ps.begin(), ps.end());
    std::sort(ks.begin(), ks.end());
    std::sort(ts.begin(), ts.end());

    CvResult result;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (auto p : ps) {
        for (auto k : ks) {
            for (auto t : ts) {
                HyperParams hp = base;
                hp.p = p;
                hp.k_multiplier = k;
                hp.trim_frac = t;
                CvCell cell{hp, std::numeric_limits<double>::infinity()};
                try {
                    const double m = skill_of(ensemble_predict(frame, pool, hp, split, opts)).mse;
                    if (std::isfinite(m)) {
                        cell.mse = m;
                    }
                } catch (const Error&) {
                    // unevaluable cell (e.g. p larger than the pool)
                }
                // Strict improvement keeps the earliest cell in (p, k, trim) order on ties.
                if (cell.mse < best || (!found && std::isfinite(cell.mse))) {
                    best = cell.mse;
                    result.best = hp;
                    found = true;
                }
                result.cells.push_back(cell);
            }
        }
    }
    if (!found) {
        throw Error("insufficient-data", "no grid cell could be evaluated");
    }
    return result;
}

RollingResult rolling_origin_run(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                                 const std::optional<HyperGrid>& grid, std::size_t window_len,
                                 std::size_t step_len, const EnsembleOptions& opts) {
    require(step_len >= 1 && window_len > step_len, "rolling window must be longer than its step");
    if (frame.size() < window_len + step_len) {
        throw Error("precondition", fmt::format("frame has {} rows; rolling run needs at least window + step = {}",
                                                frame.size(), window_len + step_len));
    }
    const std::size_t n_windows = (frame.size() - window_len) / step_len + 1;
    auto window_split = [&](std::size_t w) {
        const std::size_t start = w * step_len;
        return split_at_row(frame.slice_rows(start, start + window_len), window_len - step_len);
    };

    RollingResult out;
    out.combined.horizon = hp.horizon;
    std::optional<HyperParams> tuned;
    for (std::size_t w = 0; w < n_windows; ++w) {
        const Split split = window_split(w);
        std::optional<HyperParams> use;
        if (!grid) {
            use = hp;
        } else if (tuned) {
            use = tuned;
        }
        if (use) {
            PredictionSet block = ensemble_predict(frame, pool, *use, split, opts);
            out.combined.base_times.insert(out.combined.base_times.end(), block.base_times.begin(),
                                           block.base_times.end());
            out.combined.combined.insert(out.combined.combined.end(), block.combined.begin(), block.combined.end());
            out.combined.truth.insert(out.combined.truth.end(), block.truth.begin(), block.truth.end());
            out.combined.skipped_specs += block.skipped_specs;
            out.blocks.push_back(std::move(block));
            out.used.push_back(*use);
            out.window_starts.push_back(w * step_len);
        }
        if (grid) {
            tuned = cross_validate(frame, pool, hp, *grid, split, opts).best;
        }
    }
    out.next = tuned;
    return out;
}

std::vector<HorizonSkill> horizon_sweep(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                                        const Split& split, std::span<const int> horizons,
                                        const EnsembleOptions& opts) {
    std::vector<HorizonSkill> out;
    for (int h : horizons) {
        require(h >= 1, fmt::format("horizon must be >= 1 (got {})", h));
        HyperParams run = hp;
        run.horizon = h;
        out.push_back({h, skill_of(ensemble_predict(frame, pool, run, split, opts))});
    }
    return out;
}

void write_predictions_csv(const PredictionSet& set, std::ostream& out, bool per_map) {
    auto num = [](double v) { return is_missing(v) ? std::string("NA") : fmt::format("{:.17g}", v); };
    out << "time,truth,combined";
    if (per_map) {
        for (Eigen::Index m = 0; m < set.per_map.rows(); ++m) {
            out << ",map" << m;
        }
    }
    out << '\n';
    for (std::size_t q = 0; q < set.size(); ++q) {
        out << set.base_times[q] + set.horizon << ',' << num(set.truth[q]) << ',' << num(set.combined[q]);
        if (per_map) {
            for (Eigen::Index m = 0; m < set.per_map.rows(); ++m) {
                out << ',' << num(set.per_map(m, static_cast<Eigen::Index>(q)));
            }
        }
        out << '\n';
    }
}

} // namespace mvf
