#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "mvf/embedding.hpp"

namespace mvf {

/// k nearest rows, nearest first. Equal distances are ordered by row index.
struct NeighborSet {
    std::vector<std::size_t> indices;
    std::vector<double> distances; // squared, in scaled units

    std::size_t size() const { return indices.size(); }
};

/// Squared distance after dividing both points by the per-column scale. The
/// brute-force scan and the tree share this exact arithmetic so their results
/// agree bit for bit.
double scaled_sq_distance(const double* scaled_row, const double* scaled_query, std::size_t p);

/// Reference scan over every row of `X`.
NeighborSet knn_brute_force(const RowMatrix& X, const Eigen::VectorXd& x0, std::size_t k,
                            const Eigen::VectorXd& scaling);

/// Exact k-nearest-neighbor index over the scaled rows of a design matrix.
/// Low-dimensional inputs use a kd-tree; wide inputs fall back to a scan
/// because the tree no longer prunes.
class NeighborIndex {
public:
    enum class Method { Auto, BruteForce, KdTree };

    NeighborIndex(const RowMatrix& X, Eigen::VectorXd scaling, Method method = Method::Auto);

    NeighborSet query(const Eigen::VectorXd& x0, std::size_t k) const;

    std::size_t rows() const { return static_cast<std::size_t>(scaled_.rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(scaled_.cols()); }
    Method method() const { return method_; }
    const Eigen::VectorXd& scaling() const { return scaling_; }

private:
    struct Node {
        // Leaf when left < 0: points perm_[begin, end).
        int left = -1;
        int right = -1;
        int axis = 0;
        double split = 0.0;
        std::size_t begin = 0;
        std::size_t end = 0;
    };

    int build(std::size_t begin, std::size_t end);
    Eigen::VectorXd scale_query(const Eigen::VectorXd& x0) const;

    RowMatrix scaled_;
    Eigen::VectorXd scaling_;
    Method method_;
    std::vector<std::size_t> perm_;
    std::vector<Node> nodes_;
};

/// Per-column standard deviation (n-1 denominator). Zero-variance columns get
/// scale 1 so distances stay defined.
Eigen::VectorXd column_scales(const RowMatrix& X);

/// Convenience wrapper: exact k-nearest rows of `X` to `x0` under `scaling`.
NeighborSet knn_query(const RowMatrix& X, const Eigen::VectorXd& x0, std::size_t k, const Eigen::VectorXd& scaling);

} // namespace mvf
