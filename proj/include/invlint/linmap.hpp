#pragma once

// The frozen linear encoder map A with Y ~ A U, fitted by ridge regression.
// Samples are rows: U is n x P, Y is n x M, A is M x P.

#include "invlint/types.hpp"

#include <Eigen/Core>

#include <string>

namespace invlint {

struct FitStats {
    double train_mae = 0.0;
    double train_mse = 0.0;
    double test_mae = 0.0;
    double test_mse = 0.0;
};

template <typename Scalar>
struct LinearMap {
    Mat<Scalar> A;
    double alpha = 1.0;
    std::string solver;  // "cholesky" or "svd"
    FitStats stats;

    template <typename NewScalar>
    LinearMap<NewScalar> cast() const {
        return {A.template cast<NewScalar>(), alpha, solver, stats};
    }
};

/// Condition number above which the normal equations are abandoned for the SVD route.
inline constexpr double kRidgeConditionLimit = 1e12;

/// Minimises sum_i |Y_i - A U_i|^2 + alpha |A|_F^2 in 64-bit. Throws
/// RankDeficient when alpha == 0 and U does not have full column rank.
LinearMap<double> fit_ridge(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, double alpha);

/// Ridge on U with every column divided by its root mean square (all-zero
/// columns are left alone); the scaling is folded back so A applies to raw U.
LinearMap<double> fit_ridge_scaled(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, double alpha);

template <typename Scalar, typename Derived>
Eigen::VectorXd predict_embedding(const LinearMap<Scalar>& map, const Eigen::MatrixBase<Derived>& u) {
    if (u.size() != map.A.cols())
        throw ConfigError("embedding has " + std::to_string(u.size()) + " entries, linear map expects " +
                          std::to_string(map.A.cols()));
    return map.A.template cast<double>() * u.template cast<double>();
}

struct RegressionReport {
    double mae = 0.0;
    double mse = 0.0;
    double y_range = 0.0;     // max(Y) - min(Y)
    double y_abs_mean = 0.0;  // |mean(Y)|
};

/// Elementwise errors of U A^T against Y over every embedding coordinate.
RegressionReport regression_report(const Eigen::MatrixXd& A, const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y);

/// Singular values of A divided by the largest, nonincreasing, at most `truncate` long.
Eigen::VectorXd svd_spectrum(const Eigen::MatrixXd& A, Eigen::Index truncate = 150);

} // namespace invlint
