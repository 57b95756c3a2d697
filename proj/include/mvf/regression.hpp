#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mvf/embedding.hpp"
#include "mvf/neighbors.hpp"

namespace mvf {

/// Condition-number threshold above which the normal matrix is ridge-regularized.
inline constexpr double kRidgeConditionLimit = 1e12;
inline constexpr double kDefaultRidgeEps = 1e-8;

struct LinearModel {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    /// Design columns the coefficients apply to; empty means all columns in order.
    std::vector<std::size_t> selected;
    bool ridge_used = false;

    double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Least squares with intercept on (X, y). The normal matrix is built from
/// centered, column-equilibrated data; when its reciprocal condition estimate
/// falls below 1/kRidgeConditionLimit, `ridge_eps * trace / p` is added to the
/// diagonal. Throws when the system is still singular.
LinearModel fit_ols(const Eigen::Ref<const RowMatrix>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                    double ridge_eps = kDefaultRidgeEps);

/// max(p + 2, round(multiplier * sqrt(n))).
std::size_t neighbor_count(double multiplier, std::size_t n, std::size_t p);

struct LocalPrediction {
    double prediction = 0.0;
    /// Observed minus fitted value at the single nearest training row.
    double nn_residual = 0.0;
    bool ridge_used = false;
};

/// Local linear regression over one design matrix. Neighbor distances use the
/// design's per-column standard deviations unless a scaling is supplied.
class LocalLinearRegressor {
public:
    explicit LocalLinearRegressor(const DesignMatrix& design, std::optional<Eigen::VectorXd> scaling = std::nullopt,
                                  NeighborIndex::Method method = NeighborIndex::Method::Auto);

    LocalPrediction predict(const Eigen::VectorXd& x0, std::size_t k, double ridge_eps = kDefaultRidgeEps) const;
    LinearModel fit_at(const Eigen::VectorXd& x0, std::size_t k, double ridge_eps, NeighborSet* neighbors) const;

    const NeighborIndex& index() const { return index_; }

private:
    DesignMatrix design_;
    NeighborIndex index_;
};

LocalPrediction local_linear_predict(const DesignMatrix& design, const Eigen::VectorXd& x0, std::size_t k,
                                     double ridge_eps = kDefaultRidgeEps);

/// Ordinary least squares over every row of the design.
LinearModel global_linear_fit(const DesignMatrix& design);

/// Greedy forward stepwise selection: repeatedly adds the column most
/// correlated with the current residual, stopping at `max_terms` or as soon
/// as adjusted R^2 would drop.
LinearModel forward_select_fit(const DesignMatrix& design, std::size_t max_terms);

} // namespace mvf
