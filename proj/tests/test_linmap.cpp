#include "invlint/linmap.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace invlint;

namespace {

Eigen::MatrixXd random_matrix(std::uint64_t seed, Eigen::Index r, Eigen::Index c) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Eigen::MatrixXd m(r, c);
    for (auto& v : m.reshaped()) v = n(rng);
    return m;
}

double objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, double alpha) {
    return (U * A.transpose() - Y).squaredNorm() + alpha * A.squaredNorm();
}

} // namespace

TEST_CASE("scalar ridge") {
    const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(1, 1, 2.0), y = Eigen::MatrixXd::Constant(1, 1, 6.0);
    CHECK(fit_ridge(u, y, 0.0).A(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(fit_ridge(u, y, 1.0).A(0, 0) - 12.0 / 5.0) < 1e-9);
}

TEST_CASE("planted solution is recovered") {
    const Eigen::MatrixXd U = random_matrix(1, 20, 4), G = random_matrix(2, 3, 4);
    const LinearMap<double> m = fit_ridge(U, U * G.transpose(), 0.0);
    CHECK((m.A - G).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(m.solver == "cholesky");
}

TEST_CASE("rank deficiency") {
    Eigen::MatrixXd U = random_matrix(3, 10, 3);
    U.col(2) = U.col(0) + U.col(1);
    const Eigen::MatrixXd Y = random_matrix(4, 10, 2);
    try {
        fit_ridge(U, Y, 0.0);
        FAIL("expected RankDeficient");
    } catch (const RankDeficient& e) {
        CHECK(e.rank() == 2);
        CHECK(e.required() == 3);
        CHECK(std::string(e.what()).find("rank 2 < 3") != std::string::npos);
    }
    const LinearMap<double> m = fit_ridge(U, Y, 0.5);
    CHECK(m.A.allFinite());
    // more unknowns than samples
    CHECK_THROWS_AS(fit_ridge(random_matrix(5, 3, 6), random_matrix(6, 3, 2), 0.0), RankDeficient);
}

TEST_CASE("ill-conditioned gram switches to the svd route") {
    Eigen::MatrixXd U = random_matrix(7, 30, 4);
    U.col(3) = U.col(0) + 1e-9 * U.col(3);
    const Eigen::MatrixXd Y = random_matrix(8, 30, 2);
    const LinearMap<double> m = fit_ridge(U, Y, 1e-12);
    CHECK(m.solver == "svd");
    // agrees with the explicit normal-equation formula solved by a rank-revealing QR
    Eigen::MatrixXd gram = U.transpose() * U;
    gram.diagonal().array() += 1e-12;
    const Eigen::MatrixXd ref = gram.colPivHouseholderQr().solve(U.transpose() * Y).transpose();
    CHECK((U * m.A.transpose() - U * ref.transpose()).norm() / (U * ref.transpose()).norm() < 1e-5);
}

TEST_CASE("ridge optimality properties") {
    const Eigen::MatrixXd U = random_matrix(10, 40, 6), Y = random_matrix(11, 40, 3);
    const double alpha = 0.7;
    const Eigen::MatrixXd A = fit_ridge(U, Y, alpha).A;
    const double best = objective(A, U, Y, alpha);
    for (int i = 0; i < 20; ++i) CHECK(best <= objective(A + 1e-3 * random_matrix(100 + i, 3, 6), U, Y, alpha));

    const Eigen::MatrixXd A0 = fit_ridge(U, Y, 0.0).A;
    const Eigen::MatrixXd orth = (U * A0.transpose() - Y).transpose() * U;
    CHECK(orth.norm() < 1e-6 * (Y.transpose() * U).norm());

    double prev = std::numeric_limits<double>::infinity();
    for (double a : {0.0, 0.1, 1.0, 10.0}) {
        const double n = fit_ridge(U, Y, a).A.norm();
        CHECK(n <= prev);
        prev = n;
    }
}

TEST_CASE("column scaling leaves the unregularised fit unchanged") {
    Eigen::MatrixXd U = random_matrix(12, 50, 5);
    U.col(1) *= 1e-4;
    U.col(3) *= 1e3;
    const Eigen::MatrixXd Y = random_matrix(13, 50, 2);
    const Eigen::MatrixXd a = fit_ridge(U, Y, 0.0).A, b = fit_ridge_scaled(U, Y, 0.0).A;
    CHECK((a - b).norm() / a.norm() < 1e-9);
    // with alpha > 0 it equals ridge on explicitly scaled columns
    Eigen::VectorXd s(5);
    for (int j = 0; j < 5; ++j) s(j) = std::sqrt(U.col(j).squaredNorm() / 50.0);
    const Eigen::MatrixXd ref = fit_ridge(U * s.cwiseInverse().asDiagonal(), Y, 2.0).A * s.cwiseInverse().asDiagonal();
    CHECK((fit_ridge_scaled(U, Y, 2.0).A - ref).norm() / ref.norm() < 1e-12);
    Eigen::MatrixXd Z = U;
    Z.col(2).setZero();
    CHECK(fit_ridge_scaled(Z, Y, 1.0).A.allFinite());
}

TEST_CASE("fit_ridge input validation") {
    CHECK_THROWS_AS(fit_ridge(Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 1), 1.0), ConfigError);
    CHECK_THROWS_AS(fit_ridge(random_matrix(1, 3, 2), random_matrix(2, 4, 1), 1.0), ConfigError);
    CHECK_THROWS_AS(fit_ridge(random_matrix(1, 3, 2), random_matrix(2, 3, 1), -1.0), ConfigError);
}

TEST_CASE("predict_embedding") {
    const Eigen::VectorXd u = random_matrix(20, 4, 1);
    LinearMap<double> id{Eigen::MatrixXd::Identity(4, 4), 0.0, "", {}};
    CHECK(predict_embedding(id, u) == u);
    CHECK(predict_embedding(id, Eigen::VectorXd::Zero(4)).isZero());
    LinearMap<float> m{random_matrix(21, 3, 4).cast<float>(), 1.0, "", {}};
    const Eigen::VectorXd y = predict_embedding(m, u);
    for (int i = 0; i < 3; ++i) {
        double dot = 0.0;
        for (int j = 0; j < 4; ++j) dot += double(m.A(i, j)) * u(j);
        CHECK(y(i) == doctest::Approx(dot).epsilon(1e-6));
    }
    CHECK_THROWS_AS(predict_embedding(m, Eigen::VectorXd::Zero(5)), ConfigError);
}

TEST_CASE("regression report") {
    const Eigen::MatrixXd U = random_matrix(30, 6, 3), A = random_matrix(31, 2, 3);
    const Eigen::MatrixXd Y = U * A.transpose();
    const RegressionReport perfect = regression_report(A, U, Y);
    CHECK(perfect.mae == doctest::Approx(0.0));
    const RegressionReport off = regression_report(A, U, (Y.array() - 0.25).matrix());
    CHECK(off.mae == doctest::Approx(0.25));
    CHECK(off.mse == doctest::Approx(0.0625));

    const Eigen::MatrixXd Y2 = random_matrix(32, 6, 2);
    const RegressionReport r = regression_report(A, U, Y2);
    double mae = 0, mse = 0, lo = 1e300, hi = -1e300, mean = 0;
    for (int i = 0; i < 6; ++i)
        for (int m = 0; m < 2; ++m) {
            double p = 0;
            for (int j = 0; j < 3; ++j) p += A(m, j) * U(i, j);
            mae += std::abs(p - Y2(i, m)) / 12;
            mse += (p - Y2(i, m)) * (p - Y2(i, m)) / 12;
            lo = std::min(lo, Y2(i, m));
            hi = std::max(hi, Y2(i, m));
            mean += Y2(i, m) / 12;
        }
    CHECK(std::abs(r.mae - mae) < 1e-9);
    CHECK(std::abs(r.mse - mse) < 1e-9);
    CHECK(std::abs(r.y_range - (hi - lo)) < 1e-9);
    CHECK(std::abs(r.y_abs_mean - std::abs(mean)) < 1e-9);
    CHECK_THROWS_AS(regression_report(A, Eigen::MatrixXd(0, 3), Eigen::MatrixXd(0, 2)), ConfigError);
}

TEST_CASE("svd spectrum") {
    CHECK(svd_spectrum(Eigen::MatrixXd::Identity(3, 3)).isApprox(Eigen::Vector3d::Ones()));
    const Eigen::VectorXd d = svd_spectrum(Eigen::Vector3d(4, 2, 0).asDiagonal().toDenseMatrix());
    REQUIRE(d.size() == 3);
    CHECK(d(0) == 1.0);
    CHECK(d(1) == doctest::Approx(0.5));
    CHECK(std::abs(d(2)) < 1e-15);

    const Eigen::MatrixXd A = random_matrix(40, 6, 5);
    Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A.transpose() * A).eigenvalues().reverse();
    ev = ev.cwiseMax(0.0).cwiseSqrt();
    const Eigen::VectorXd s = svd_spectrum(A);
    REQUIRE(s.size() == 5);
    CHECK((s - ev / ev(0)).cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index i = 1; i < s.size(); ++i) CHECK(s(i) <= s(i - 1));

    CHECK(svd_spectrum(random_matrix(41, 20, 30), 7).size() == 7);
    CHECK_THROWS_AS(svd_spectrum(Eigen::MatrixXd::Zero(3, 3)), ConfigError);
}
