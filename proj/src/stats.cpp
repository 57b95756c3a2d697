#include "mvf/stats.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "mvf/error.hpp"

namespace mvf::stats {

double mean(std::span<const double> xs) {
    require(!xs.empty(), "mean of an empty sample");
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    require(xs.size() >= 2, "variance needs at least two values");
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) {
        s += (x - m) * (x - m);
    }
    return s / static_cast<double>(xs.size() - 1);
}

double sample_sd(std::span<const double> xs) { return std::sqrt(sample_variance(xs)); }

double pearson(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "pearson: length mismatch");
    double n = 0, sa = 0, sb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isfinite(a[i]) && std::isfinite(b[i])) {
            n += 1;
            sa += a[i];
            sb += b[i];
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (n < 2) {
        return nan;
    }
    const double ma = sa / n;
    const double mb = sb / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isfinite(a[i]) && std::isfinite(b[i])) {
            const double da = a[i] - ma;
            const double db = b[i] - mb;
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
    }
    if (!(saa > 0) || !(sbb > 0)) {
        return nan;
    }
    const double r = sab / std::sqrt(saa * sbb);
    return std::max(-1.0, std::min(1.0, r));
}

double mse(std::span<const double> pred, std::span<const double> truth) {
    require(pred.size() == truth.size(), "mse: length mismatch");
    double s = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (std::isfinite(pred[i]) && std::isfinite(truth[i])) {
            s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
            ++n;
        }
    }
    return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double quantile_type7(std::span<const double> sorted, double prob) {
    require(!sorted.empty(), "quantile of an empty sample");
    require(prob >= 0 && prob <= 1, "quantile probability outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double prob) {
    require(prob > 0 && prob < 1, "normal quantile needs 0 < prob < 1");
    return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

} // namespace mvf::stats
