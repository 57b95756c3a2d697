#include "mvf/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <utility>

#include <fmt/format.h>

#include "mvf/error.hpp"

namespace mvf {

namespace {

constexpr std::size_t kLeafSize = 16;
constexpr std::size_t kMaxTreeDims = 8;

using Candidate = std::pair<double, std::size_t>; // (distance, row); lexicographic order

void check_query(std::size_t n, std::size_t p, const Eigen::VectorXd& x0, std::size_t k,
                 const Eigen::VectorXd& scaling) {
    if (k < 1 || k > n) {
        throw Error("precondition", fmt::format("knn: k={} outside [1, {}]", k, n));
    }
    require(static_cast<std::size_t>(x0.size()) == p, "knn: query dimension mismatch");
    require(static_cast<std::size_t>(scaling.size()) == p, "knn: scaling dimension mismatch");
}

RowMatrix scale_rows(const RowMatrix& X, const Eigen::VectorXd& scaling) {
    RowMatrix out = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        out.col(j) /= scaling[j];
    }
    return out;
}

NeighborSet to_set(std::vector<Candidate>& c) {
    std::sort(c.begin(), c.end());
    NeighborSet s;
    s.indices.reserve(c.size());
    s.distances.reserve(c.size());
    for (const auto& [d, i] : c) {
        s.indices.push_back(i);
        s.distances.push_back(d);
    }
    return s;
}

NeighborSet scan(const RowMatrix& scaled, const Eigen::VectorXd& q, std::size_t k) {
    const auto n = static_cast<std::size_t>(scaled.rows());
    const auto p = static_cast<std::size_t>(scaled.cols());
    std::vector<Candidate> all(n);
    for (std::size_t i = 0; i < n; ++i) {
        all[i] = {scaled_sq_distance(scaled.row(static_cast<Eigen::Index>(i)).data(), q.data(), p), i};
    }
    if (k < n) {
        std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
        all.resize(k);
    }
    return to_set(all);
}

} // namespace

double scaled_sq_distance(const double* a, const double* b, std::size_t p) {
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

Eigen::VectorXd column_scales(const RowMatrix& X) {
    Eigen::VectorXd s(X.cols());
    const double n = static_cast<double>(X.rows());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double mean = X.col(j).mean();
        const double var = n > 1 ? (X.col(j).array() - mean).square().sum() / (n - 1) : 0.0;
        s[j] = var > 0 && std::isfinite(var) ? std::sqrt(var) : 1.0;
    }
    return s;
}

NeighborSet knn_brute_force(const RowMatrix& X, const Eigen::VectorXd& x0, std::size_t k,
                            const Eigen::VectorXd& scaling) {
    check_query(static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(X.cols()), x0, k, scaling);
    require((scaling.array() > 0).all(), "knn: scaling must be strictly positive");
    RowMatrix scaled = scale_rows(X, scaling);
    Eigen::VectorXd q = x0.cwiseQuotient(scaling);
    return scan(scaled, q, k);
}

NeighborIndex::NeighborIndex(const RowMatrix& X, Eigen::VectorXd scaling, Method method)
    : scaling_(std::move(scaling)), method_(method) {
    require(static_cast<Eigen::Index>(scaling_.size()) == X.cols(), "knn: scaling dimension mismatch");
    require((scaling_.array() > 0).all(), "knn: scaling must be strictly positive");
    scaled_ = scale_rows(X, scaling_);
    if (method_ == Method::Auto) {
        method_ = (static_cast<std::size_t>(X.cols()) <= kMaxTreeDims && static_cast<std::size_t>(X.rows()) > 4 * kLeafSize)
                      ? Method::KdTree
                      : Method::BruteForce;
    }
    if (method_ == Method::KdTree && X.rows() > 0) {
        perm_.resize(static_cast<std::size_t>(X.rows()));
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        nodes_.reserve(2 * perm_.size() / kLeafSize + 1);
        build(0, perm_.size());
    }
}

int NeighborIndex::build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{-1, -1, 0, 0.0, begin, end});
    if (end - begin <= kLeafSize) {
        return id;
    }
    // Split on the axis of widest spread, at the median.
    int axis = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < scaled_.cols(); ++j) {
        double lo = scaled_(static_cast<Eigen::Index>(perm_[begin]), j);
        double hi = lo;
        for (std::size_t i = begin + 1; i < end; ++i) {
            double v = scaled_(static_cast<Eigen::Index>(perm_[i]), j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best) {
            best = hi - lo;
            axis = static_cast<int>(j);
        }
    }
    if (best <= 0.0) {
        return id; // all points identical
    }
    const std::size_t mid = begin + (end - begin) / 2;
    auto key = [&](std::size_t r) { return scaled_(static_cast<Eigen::Index>(r), axis); };
    std::nth_element(perm_.begin() + static_cast<std::ptrdiff_t>(begin), perm_.begin() + static_cast<std::ptrdiff_t>(mid),
                     perm_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    const double split = key(perm_[mid]);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    nodes_[static_cast<std::size_t>(id)].axis = axis;
    nodes_[static_cast<std::size_t>(id)].split = split;
    return id;
}

Eigen::VectorXd NeighborIndex::scale_query(const Eigen::VectorXd& x0) const { return x0.cwiseQuotient(scaling_); }

NeighborSet NeighborIndex::query(const Eigen::VectorXd& x0, std::size_t k) const {
    check_query(rows(), dims(), x0, k, scaling_);
    const Eigen::VectorXd q = scale_query(x0);
    if (method_ == Method::BruteForce) {
        return scan(scaled_, q, k);
    }

    const std::size_t p = dims();
    std::priority_queue<Candidate> heap; // max-heap: worst kept candidate on top
    auto offer = [&](std::size_t row) {
        Candidate c{scaled_sq_distance(scaled_.row(static_cast<Eigen::Index>(row)).data(), q.data(), p), row};
        if (heap.size() < k) {
            heap.push(c);
        } else if (c < heap.top()) {
            heap.pop();
            heap.push(c);
        }
    };

    // Left subtree holds coordinates <= split, right >= split. A far subtree
    // is skipped only when its axis gap alone strictly exceeds the current
    // k-th distance, so equal-distance rows are still visited and the
    // row-index tie-break matches the scan.
    auto visit = [&](auto&& self, int id) -> void {
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        if (node.left < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                offer(perm_[i]);
            }
            return;
        }
        const double diff = q[node.axis] - node.split;
        const int near = diff <= 0 ? node.left : node.right;
        const int far = diff <= 0 ? node.right : node.left;
        self(self, near);
        if (heap.size() < k || diff * diff <= heap.top().first) {
            self(self, far);
        }
    };
    visit(visit, 0);

    std::vector<Candidate> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
        out.push_back(heap.top());
        heap.pop();
    }
    return to_set(out);
}

NeighborSet knn_query(const RowMatrix& X, const Eigen::VectorXd& x0, std::size_t k, const Eigen::VectorXd& scaling) {
    return NeighborIndex(X, scaling).query(x0, k);
}

} // namespace mvf
