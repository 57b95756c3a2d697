#include "mvf/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "mvf/error.hpp"

namespace mvf {

double LinearModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    double v = intercept;
    if (selected.empty()) {
        v += coefficients.dot(x);
    } else {
        for (std::size_t j = 0; j < selected.size(); ++j) {
            v += coefficients[static_cast<Eigen::Index>(j)] * x[static_cast<Eigen::Index>(selected[j])];
        }
    }
    return v;
}

LinearModel fit_ols(const Eigen::Ref<const RowMatrix>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                    double ridge_eps) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    require(n >= 1 && y.size() == n, "ols: row count mismatch");
    require(ridge_eps >= 0, "ols: ridge_eps must be >= 0");

    const Eigen::RowVectorXd xmean = X.colwise().mean();
    const double ymean = y.mean();
    LinearModel model;
    if (p == 0) {
        model.intercept = ymean;
        return model;
    }
    const RowMatrix Xc = X.rowwise() - xmean;
    const Eigen::VectorXd yc = y.array() - ymean;

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(p, p);
    G.selfadjointView<Eigen::Lower>().rankUpdate(Xc.transpose());
    G = G.selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd b = Xc.transpose() * yc;

    // Equilibrate to unit diagonal; constant columns keep scale 1 and make
    // the matrix singular, which the ridge branch handles.
    Eigen::VectorXd d = G.diagonal().cwiseSqrt();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(d[j] > 0) || !std::isfinite(d[j])) {
            d[j] = 1.0;
        }
    }
    Eigen::MatrixXd Gn = d.cwiseInverse().asDiagonal() * G * d.cwiseInverse().asDiagonal();
    const Eigen::VectorXd bn = b.cwiseQuotient(d);

    Eigen::LLT<Eigen::MatrixXd> llt(Gn);
    bool ok = llt.info() == Eigen::Success && llt.rcond() >= 1.0 / kRidgeConditionLimit;
    if (!ok) {
        const double trace = Gn.trace();
        const double lambda = ridge_eps * trace / static_cast<double>(p);
        if (!(lambda > 0)) {
            throw Error("numeric", "degenerate regression design (singular normal matrix)");
        }
        Gn.diagonal().array() += lambda;
        llt.compute(Gn);
        if (llt.info() != Eigen::Success) {
            throw Error("numeric", "degenerate regression design even after ridge regularization");
        }
        model.ridge_used = true;
    }
    model.coefficients = llt.solve(bn).cwiseQuotient(d);
    if (!model.coefficients.allFinite()) {
        throw Error("numeric", "regression produced non-finite coefficients");
    }
    model.intercept = ymean - xmean.dot(model.coefficients);
    return model;
}

std::size_t neighbor_count(double multiplier, std::size_t n, std::size_t p) {
    require(multiplier > 0, "neighbor multiplier must be positive");
    const auto k = static_cast<std::size_t>(std::llround(multiplier * std::sqrt(static_cast<double>(n))));
    return std::max(k, p + 2);
}

LocalLinearRegressor::LocalLinearRegressor(const DesignMatrix& design, std::optional<Eigen::VectorXd> scaling,
                                           NeighborIndex::Method method)
    : design_(design), index_(design.X, scaling ? std::move(*scaling) : column_scales(design.X), method) {}

LinearModel LocalLinearRegressor::fit_at(const Eigen::VectorXd& x0, std::size_t k, double ridge_eps,
                                         NeighborSet* neighbors) const {
    const std::size_t p = design_.cols();
    if (k < p + 2) {
        throw Error("precondition", fmt::format("local fit needs k >= p + 2 (k={}, p={})", k, p));
    }
    NeighborSet nn = index_.query(x0, k);
    RowMatrix Xk(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
    Eigen::VectorXd yk(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        const auto r = static_cast<Eigen::Index>(nn.indices[i]);
        Xk.row(static_cast<Eigen::Index>(i)) = design_.X.row(r);
        yk[static_cast<Eigen::Index>(i)] = design_.y[r];
    }
    LinearModel model = fit_ols(Xk, yk, ridge_eps);
    if (neighbors) {
        *neighbors = std::move(nn);
    }
    return model;
}

LocalPrediction LocalLinearRegressor::predict(const Eigen::VectorXd& x0, std::size_t k, double ridge_eps) const {
    NeighborSet nn;
    LinearModel model = fit_at(x0, k, ridge_eps, &nn);
    const auto nearest = static_cast<Eigen::Index>(nn.indices.front());
    LocalPrediction out;
    out.prediction = model.predict(x0);
    out.nn_residual = design_.y[nearest] - model.predict(design_.X.row(nearest).transpose());
    out.ridge_used = model.ridge_used;
    return out;
}

LocalPrediction local_linear_predict(const DesignMatrix& design, const Eigen::VectorXd& x0, std::size_t k,
                                     double ridge_eps) {
    if (k > design.rows()) {
        throw Error("precondition", fmt::format("k={} exceeds design rows {}", k, design.rows()));
    }
    return LocalLinearRegressor(design).predict(x0, k, ridge_eps);
}

LinearModel global_linear_fit(const DesignMatrix& design) {
    const std::size_t p = design.cols();
    if (design.rows() < p + 2) {
        throw Error("precondition",
                    fmt::format("global fit needs at least p + 2 = {} rows, have {}", p + 2, design.rows()));
    }
    return fit_ols(design.X, design.y);
}

namespace {

double r_squared(const LinearModel& m, const RowMatrix& X, const Eigen::VectorXd& y) {
    const double ymean = y.mean();
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double e = y[i] - m.predict(X.row(i).transpose());
        ss_res += e * e;
        ss_tot += (y[i] - ymean) * (y[i] - ymean);
    }
    return ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
}

} // namespace

LinearModel forward_select_fit(const DesignMatrix& design, std::size_t max_terms) {
    const std::size_t p = design.cols();
    const std::size_t n = design.rows();
    if (max_terms < 1 || max_terms > p) {
        throw Error("precondition", fmt::format("max_terms={} outside [1, {}]", max_terms, p));
    }
    if (n < p + 2) {
        throw Error("precondition", fmt::format("forward selection needs at least p + 2 = {} rows, have {}", p + 2, n));
    }
    const RowMatrix Xc = design.X.rowwise() - design.X.colwise().mean();
    const Eigen::VectorXd col_norm = Xc.colwise().norm().transpose();

    std::vector<std::size_t> selected;
    Eigen::VectorXd residual = design.y.array() - design.y.mean();
    LinearModel best;
    best.intercept = design.y.mean();
    best.coefficients.resize(0);
    double best_adj = 0.0; // intercept-only model

    while (selected.size() < max_terms) {
        std::size_t pick = p;
        double pick_score = -1.0;
        const double rnorm = residual.norm();
        for (std::size_t j = 0; j < p; ++j) {
            if (std::find(selected.begin(), selected.end(), j) != selected.end() || !(col_norm[static_cast<Eigen::Index>(j)] > 0)) {
                continue;
            }
            const double score = rnorm > 0 ? std::abs(Xc.col(static_cast<Eigen::Index>(j)).dot(residual)) /
                                                 (col_norm[static_cast<Eigen::Index>(j)] * rnorm)
                                           : 0.0;
            if (score > pick_score) {
                pick_score = score;
                pick = j;
            }
        }
        if (pick == p) {
            break;
        }
        auto trial = selected;
        trial.push_back(pick);
        RowMatrix Xs(design.X.rows(), static_cast<Eigen::Index>(trial.size()));
        for (std::size_t j = 0; j < trial.size(); ++j) {
            Xs.col(static_cast<Eigen::Index>(j)) = design.X.col(static_cast<Eigen::Index>(trial[j]));
        }
        LinearModel m = fit_ols(Xs, design.y);
        const double r2 = r_squared(m, Xs, design.y);
        const double m_terms = static_cast<double>(trial.size());
        const double adj = 1.0 - (1.0 - r2) * (static_cast<double>(n) - 1.0) / (static_cast<double>(n) - m_terms - 1.0);
        if (!selected.empty() && adj < best_adj) {
            break;
        }
        selected = std::move(trial);
        best = std::move(m);
        best_adj = adj;
        for (Eigen::Index i = 0; i < Xs.rows(); ++i) {
            residual[i] = design.y[i] - best.predict(Xs.row(i).transpose());
        }
    }
    best.selected = selected;
    return best;
}

} // namespace mvf
