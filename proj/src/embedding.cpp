#include "mvf/embedding.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mvf/error.hpp"

namespace mvf {

int DelayMapSpec::max_lag() const {
    int m = 0;
    for (const auto& c : coords) {
        m = std::max(m, c.lag);
    }
    return m;
}

void DelayMapSpec::validate() const {
    require(!coords.empty(), "delay map needs at least one coordinate");
    require(target.horizon >= 1, "target horizon must be >= 1");
    std::set<Coordinate> seen;
    for (const auto& c : coords) {
        require(c.lag >= 0, fmt::format("negative lag for series '{}'", c.series));
        require(seen.insert(c).second, fmt::format("duplicate coordinate {}@{}", c.series, c.lag));
    }
}

std::vector<Coordinate> enumerate_pool(const std::vector<std::string>& series, int max_lag, int min_lag) {
    require(!series.empty(), "coordinate pool needs at least one series");
    require(min_lag >= 0 && max_lag >= min_lag, "coordinate pool needs 0 <= min_lag <= max_lag");
    std::vector<Coordinate> pool;
    pool.reserve(series.size() * static_cast<std::size_t>(max_lag - min_lag + 1));
    for (int lag = min_lag; lag <= max_lag; ++lag) {
        for (const auto& s : series) {
            pool.push_back({s, lag});
        }
    }
    return pool;
}

std::uint64_t pool_hash(std::span<const Coordinate> pool) {
    // FNV-1a over "series@lag;" tokens.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](char c) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    };
    for (const auto& c : pool) {
        for (char ch : fmt::format("{}@{};", c.series, c.lag)) {
            mix(ch);
        }
    }
    return h;
}

Partition sample_disjoint_partition(const std::vector<Coordinate>& pool, std::size_t p, const Target& target,
                                    std::uint64_t seed) {
    require(p >= 1, "partition dimension p must be >= 1");
    if (p > pool.size()) {
        throw Error("precondition", fmt::format("partition dimension p={} exceeds pool size {}", p, pool.size()));
    }
    std::vector<Coordinate> shuffled = pool;
    std::mt19937_64 rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    Partition part;
    part.pool = pool;
    part.seed = seed;
    part.p = p;
    for (std::size_t b = 0; b + p <= shuffled.size(); b += p) {
        DelayMapSpec spec;
        spec.coords.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(b),
                           shuffled.begin() + static_cast<std::ptrdiff_t>(b + p));
        spec.target = target;
        spec.validate();
        part.specs.push_back(std::move(spec));
    }
    return part;
}

void write_manifest(const Partition& partition, std::ostream& out) {
    out << "seed " << partition.seed << '\n';
    out << "p " << partition.p << '\n';
    out << "pool_hash " << fmt::format("{:016x}", pool_hash(partition.pool)) << '\n';
    out << "pool";
    for (const auto& c : partition.pool) {
        out << ' ' << c.series << '@' << c.lag;
    }
    out << '\n';
    for (const auto& spec : partition.specs) {
        out << "spec " << spec.target.series << '+' << spec.target.horizon << " :";
        for (const auto& c : spec.coords) {
            out << ' ' << c.series << '@' << c.lag;
        }
        out << '\n';
    }
}

namespace {

Coordinate parse_coordinate(const std::string& tok, char sep) {
    auto at = tok.rfind(sep);
    if (at == std::string::npos || at == 0) {
        throw Error("manifest", fmt::format("bad coordinate token '{}'", tok));
    }
    try {
        return {tok.substr(0, at), std::stoi(tok.substr(at + 1))};
    } catch (const std::exception&) {
        throw Error("manifest", fmt::format("bad coordinate token '{}'", tok));
    }
}

} // namespace

Partition read_manifest(std::istream& in) {
    Partition part;
    std::string line;
    std::string expected_hash;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "seed") {
            ls >> part.seed;
        } else if (key == "p") {
            ls >> part.p;
        } else if (key == "pool_hash") {
            ls >> expected_hash;
        } else if (key == "pool") {
            std::string tok;
            while (ls >> tok) {
                part.pool.push_back(parse_coordinate(tok, '@'));
            }
        } else if (key == "spec") {
            std::string tgt, colon, tok;
            ls >> tgt >> colon;
            auto c = parse_coordinate(tgt, '+');
            DelayMapSpec spec;
            spec.target = {c.series, c.lag};
            while (ls >> tok) {
                spec.coords.push_back(parse_coordinate(tok, '@'));
            }
            spec.validate();
            part.specs.push_back(std::move(spec));
        } else if (!key.empty()) {
            throw Error("manifest", fmt::format("unknown manifest key '{}'", key));
        }
    }
    if (fmt::format("{:016x}", pool_hash(part.pool)) != expected_hash) {
        throw Error("manifest", "pool hash mismatch");
    }
    return part;
}

namespace {

struct ResolvedCoords {
    std::vector<std::span<const double>> columns;
    std::vector<int> lags;
    std::span<const double> target;
};

ResolvedCoords resolve(const SeriesFrame& frame, const DelayMapSpec& spec) {
    ResolvedCoords r;
    for (const auto& c : spec.coords) {
        r.columns.push_back(frame.column(c.series));
        r.lags.push_back(c.lag);
    }
    r.target = frame.column(spec.target.series);
    return r;
}

bool fill_row(const SeriesFrame& frame, const ResolvedCoords& rc, Timestamp base, double* out) {
    for (std::size_t j = 0; j < rc.lags.size(); ++j) {
        auto row = frame.row_of(base - rc.lags[j]);
        if (!row) {
            return false;
        }
        double v = rc.columns[j][*row];
        if (is_missing(v)) {
            return false;
        }
        out[j] = v;
    }
    return true;
}

} // namespace

std::optional<Eigen::VectorXd> delay_vector(const SeriesFrame& frame, const DelayMapSpec& spec, Timestamp base) {
    auto rc = resolve(frame, spec);
    Eigen::VectorXd v(static_cast<Eigen::Index>(spec.dimension()));
    if (!fill_row(frame, rc, base, v.data())) {
        return std::nullopt;
    }
    return v;
}

std::optional<double> target_value(const SeriesFrame& frame, const DelayMapSpec& spec, Timestamp base) {
    return frame.value_at(spec.target.series, base + spec.target.horizon);
}

DesignMatrix build_design(const SeriesFrame& frame, const DelayMapSpec& spec) {
    spec.validate();
    auto rc = resolve(frame, spec);
    const auto p = static_cast<Eigen::Index>(spec.dimension());

    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<Timestamp> bases;
    std::vector<double> row(static_cast<std::size_t>(p));
    for (std::size_t r = 0; r < frame.size(); ++r) {
        const Timestamp base = frame.times()[r];
        auto trow = frame.row_of(base + spec.target.horizon);
        if (!trow || is_missing(rc.target[*trow])) {
            continue;
        }
        if (!fill_row(frame, rc, base, row.data())) {
            continue;
        }
        xs.insert(xs.end(), row.begin(), row.end());
        ys.push_back(rc.target[*trow]);
        bases.push_back(base);
    }
    if (bases.empty()) {
        throw Error("precondition", "delay map yields no complete rows (n_eff = 0)");
    }
    DesignMatrix d;
    const auto n = static_cast<Eigen::Index>(bases.size());
    d.X = Eigen::Map<RowMatrix>(xs.data(), n, p);
    d.y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
    d.base_times = std::move(bases);
    return d;
}

} // namespace mvf
