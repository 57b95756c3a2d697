#include "mvf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "mvf/error.hpp"
#include "mvf/stats.hpp"

namespace mvf {

ResidualPool residual_pool_from(const PredictionSet& set, const HyperParams& hp) {
    ResidualPool pool;
    pool.q = hp.q;
    pool.hp = hp;
    pool.spec_count = static_cast<std::size_t>(set.nn_residuals.rows());
    for (Eigen::Index m = 0; m < set.nn_residuals.rows(); ++m) {
        for (Eigen::Index q = 0; q < set.nn_residuals.cols(); ++q) {
            const double r = set.nn_residuals(m, q);
            if (std::isfinite(r)) {
                pool.residuals.push_back(r);
            }
        }
    }
    if (pool.residuals.empty()) {
        throw Error("insufficient-data", "residual pool is empty");
    }
    return pool;
}

ResidualPool residual_pool(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                           const EnsembleOptions& opts) {
    hp.validate();
    const auto n_train = static_cast<std::size_t>(std::floor(hp.q * static_cast<double>(frame.size())));
    if (n_train < 1 || n_train >= frame.size()) {
        throw Error("precondition", fmt::format("q={} leaves an empty block for {} rows", hp.q, frame.size()));
    }
    EnsembleOptions local = opts;
    local.engine = Engine::LocalLinear;
    return residual_pool_from(ensemble_predict(frame, pool, hp, split_at_row(frame, n_train), local), hp);
}

Interval predictive_interval(double prediction, const ResidualPool& pool, double level) {
    require(level > 0 && level < 1, "interval level must lie in (0, 1)");
    require(!pool.residuals.empty(), "residual pool is empty");
    std::vector<double> sorted = pool.residuals;
    std::sort(sorted.begin(), sorted.end());
    const double tail = (1.0 - level) / 2.0;
    return {prediction + stats::quantile_type7(sorted, tail), prediction + stats::quantile_type7(sorted, 1.0 - tail)};
}

std::vector<double> rescale_to_pool_range(std::span<const double> preds, std::span<const double> pool_draws) {
    require(!preds.empty() && !pool_draws.empty(), "rescale needs nonempty predictions and pool");
    const auto [pmin, pmax] = std::minmax_element(preds.begin(), preds.end());
    const auto [dmin, dmax] = std::minmax_element(pool_draws.begin(), pool_draws.end());
    const double span = *pmax - *pmin;
    if (!(span > 0)) {
        throw Error("precondition", "cannot rescale predictions with zero range");
    }
    const double scale = (*dmax - *dmin) / span;
    std::vector<double> out(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        out[i] = *dmin + (preds[i] - *pmin) * scale;
    }
    return out;
}

double lilliefors_statistic(std::span<const double> sample) {
    require(sample.size() >= 5, "normality test needs at least 5 values");
    const double m = stats::mean(sample);
    const double sd = stats::sample_sd(sample);
    if (!(sd > 0)) {
        throw Error("precondition", "normality test on a zero-variance sample");
    }
    std::vector<double> z(sample.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = (sample[i] - m) / sd;
    }
    std::sort(z.begin(), z.end());
    const double n = static_cast<double>(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double f = stats::normal_cdf(z[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

LillieforsNull::LillieforsNull(std::size_t sample_size, std::size_t n_mc, std::uint64_t seed) : n_(sample_size) {
    require(sample_size >= 5, "normality test needs at least 5 values");
    require(n_mc >= 1, "normality test needs n_mc >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> draw(sample_size);
    sorted_stats_.reserve(n_mc);
    for (std::size_t r = 0; r < n_mc; ++r) {
        for (auto& v : draw) {
            v = normal(rng);
        }
        sorted_stats_.push_back(lilliefors_statistic(draw));
    }
    std::sort(sorted_stats_.begin(), sorted_stats_.end());
}

double LillieforsNull::p_value(std::span<const double> sample) const {
    require(sample.size() == n_, "normality null built for a different sample size");
    const double d = lilliefors_statistic(sample);
    const auto larger = sorted_stats_.end() - std::upper_bound(sorted_stats_.begin(), sorted_stats_.end(), d);
    return static_cast<double>(larger) / static_cast<double>(sorted_stats_.size());
}

double lilliefors_normality(std::span<const double> sample, std::size_t n_mc, std::uint64_t seed) {
    lilliefors_statistic(sample); // validates before the simulation
    return LillieforsNull(sample.size(), n_mc, seed).p_value(sample);
}

ResampleReport summarize_correlations(std::vector<double> correlations, std::size_t n_mc, std::uint64_t seed) {
    require(correlations.size() >= 2, "resampling needs R >= 2");
    ResampleReport rep;
    rep.correlations = std::move(correlations);
    rep.mean = stats::mean(rep.correlations);
    rep.sd = stats::sample_sd(rep.correlations);
    rep.bound_center = rep.mean;
    rep.bound_halfwidth = 1.96 * rep.sd;

    std::vector<double> sorted = rep.correlations;
    std::sort(sorted.begin(), sorted.end());
    const double r = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double prob = (static_cast<double>(i + 1) - 0.375) / (r + 0.25);
        const double z = rep.sd > 0 ? (sorted[i] - rep.mean) / rep.sd : 0.0;
        rep.qq_pairs.emplace_back(stats::normal_quantile(prob), z);
    }
    rep.ks_p = sorted.size() >= 5 && rep.sd > 0 ? lilliefors_normality(rep.correlations, n_mc, seed)
                                                 : std::nan("");
    return rep;
}

ResampleReport resample_correlations(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                                     const Split& split, std::size_t R, std::uint64_t base_seed,
                                     const EnsembleOptions& opts, std::size_t n_mc) {
    require(R >= 2, "resampling needs R >= 2");
    std::vector<double> cors;
    cors.reserve(R);
    for (std::size_t r = 1; r <= R; ++r) {
        HyperParams rep = hp;
        rep.seed = base_seed + r;
        const PredictionSet set = ensemble_predict(frame, pool, rep, split, opts);
        const double c = stats::pearson(set.combined, set.truth);
        if (!std::isfinite(c)) {
            throw Error("numeric", "correlation undefined: truth or predictions have zero variance");
        }
        cors.push_back(c);
    }
    return summarize_correlations(std::move(cors), n_mc, base_seed);
}

VarianceScaling variance_scaling_check(const SeriesFrame& frame, const PoolSpec& pool, const HyperParams& hp,
                                       std::pair<std::size_t, std::size_t> sizes, std::size_t R,
                                       std::uint64_t base_seed, const EnsembleOptions& opts) {
    require(sizes.first < sizes.second, "variance scaling needs sizes[0] < sizes[1]");
    require(sizes.second < frame.size(), "test size exceeds the frame");
    auto variance_at = [&](std::size_t m) {
        const Split split = split_at_row(frame, frame.size() - m);
        return stats::sample_variance(resample_correlations(frame, pool, hp, split, R, base_seed, opts, 1).correlations);
    };
    VarianceScaling out;
    out.var_small = variance_at(sizes.first);
    out.var_large = variance_at(sizes.second);
    out.ratio = out.var_small / out.var_large;
    return out;
}

void write_correlations_csv(const ResampleReport& report, std::ostream& out) {
    out << "replicate,correlation\n";
    for (std::size_t i = 0; i < report.correlations.size(); ++i) {
        out << i + 1 << ',' << fmt::format("{:.17g}", report.correlations[i]) << '\n';
    }
}

void write_qq_csv(const ResampleReport& report, std::ostream& out) {
    out << "theoretical,empirical\n";
    for (const auto& [t, e] : report.qq_pairs) {
        out << fmt::format("{:.17g},{:.17g}\n", t, e);
    }
}

void write_summary_json(const ResampleReport& report, std::ostream& out) {
    nlohmann::ordered_json j;
    j["replicates"] = report.correlations.size();
    j["mean"] = report.mean;
    j["sd"] = report.sd;
    j["ks_p"] = std::isfinite(report.ks_p) ? nlohmann::ordered_json(report.ks_p) : nlohmann::ordered_json(nullptr);
    j["bound"] = {{"center", report.bound_center}, {"halfwidth", report.bound_halfwidth}};
    out << j.dump(2) << '\n';
}

} // namespace mvf
