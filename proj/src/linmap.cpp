#include "invlint/linmap.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace invlint {

namespace {

Eigen::MatrixXd fit_svd(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, double alpha) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(U, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double tol = static_cast<double>(std::max(U.rows(), U.cols())) * std::numeric_limits<double>::epsilon() *
                       (s.size() ? s(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol) ++rank;
    if (alpha == 0.0 && rank < U.cols()) throw RankDeficient(rank, U.cols());
    Eigen::VectorXd filter(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) filter(i) = s(i) > tol || alpha > 0.0 ? s(i) / (s(i) * s(i) + alpha) : 0.0;
    // A^T = V diag(s / (s^2 + alpha)) Us^T Y
    const Eigen::MatrixXd At = svd.matrixV() * filter.asDiagonal() * (svd.matrixU().transpose() * Y);
    return At.transpose();
}

} // namespace

LinearMap<double> fit_ridge(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, double alpha) {
    if (U.rows() < 1) throw ConfigError("ridge fit needs at least one sample");
    if (U.rows() != Y.rows())
        throw ConfigError("U has " + std::to_string(U.rows()) + " samples but Y has " + std::to_string(Y.rows()));
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("ridge alpha must be finite and >= 0");
    if (!U.allFinite() || !Y.allFinite()) throw ConfigError("ridge inputs contain non-finite values");

    LinearMap<double> map;
    map.alpha = alpha;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(U.cols(), U.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(U.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += alpha;

    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues();
    const double lo = eig.minCoeff();
    const double hi = eig.maxCoeff();
    const bool well_conditioned = lo > 0.0 && hi / lo <= kRidgeConditionLimit;
    if (well_conditioned) {
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() == Eigen::Success) {
            map.A = llt.solve(U.transpose() * Y).transpose();
            map.solver = "cholesky";
        }
    }
    if (map.A.size() == 0) {
        map.A = fit_svd(U, Y, alpha);
        map.solver = "svd";
    }
    if (!map.A.allFinite()) throw NumericError("ridge solution is not finite");
    return map;
}

LinearMap<double> fit_ridge_scaled(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, double alpha) {
    if (U.rows() < 1) throw ConfigError("ridge fit needs at least one sample");
    Eigen::VectorXd scale = (U.colwise().squaredNorm() / static_cast<double>(U.rows())).cwiseSqrt().transpose();
    for (auto& s : scale)
        if (!(s > 0.0)) s = 1.0;
    const Eigen::VectorXd inv = scale.cwiseInverse();
    LinearMap<double> map = fit_ridge(U * inv.asDiagonal(), Y, alpha);
    map.A = map.A * inv.asDiagonal();
    return map;
}

RegressionReport regression_report(const Eigen::MatrixXd& A, const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y) {
    if (U.rows() == 0 || Y.size() == 0) throw ConfigError("regression report needs a non-empty set");
    if (U.rows() != Y.rows() || A.cols() != U.cols() || A.rows() != Y.cols())
        throw ConfigError("regression report dimension mismatch");
    const Eigen::MatrixXd residual = U * A.transpose() - Y;
    RegressionReport r;
    r.mae = residual.cwiseAbs().mean();
    r.mse = residual.squaredNorm() / static_cast<double>(residual.size());
    r.y_range = Y.maxCoeff() - Y.minCoeff();
    r.y_abs_mean = std::abs(Y.mean());
    return r;
}

Eigen::VectorXd svd_spectrum(const Eigen::MatrixXd& A, Eigen::Index truncate) {
    if (A.size() == 0 || !A.allFinite()) throw ConfigError("spectrum needs a finite, non-empty matrix");
    if (truncate < 1) throw ConfigError("spectrum truncation must be >= 1");
    const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXd>(A).singularValues();
    if (!(s(0) > 0.0)) throw ConfigError("spectrum of an all-zero matrix is undefined");
    const Eigen::Index n = std::min(truncate, s.size());
    return s.head(n) / s(0);
}

} // namespace invlint
