#pragma once

// Independent reference computations shared by the unit tests and the acceptance suite.

#include "invlint/transforms.hpp"

#include <cmath>
#include <numbers>

namespace invlint::testing {

/// Direct 11 x 11 windowed sums; no separable filtering.
inline double ssim_direct(const Gridd& a, const Gridd& b) {
    double win[11][11], total = 0.0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j)
            total += win[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
    const double c1 = 0.02 * 0.02, c2 = 0.06 * 0.06;
    double sum = 0.0;
    int count = 0;
    for (int r = 0; r + 11 <= a.rows(); ++r)
        for (int c = 0; c + 11 <= a.cols(); ++c) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double w = win[i][j] / total, x = a(r + i, c + j), y = b(r + i, c + j);
                    ma += w * x;
                    mb += w * y;
                    saa += w * x * x;
                    sbb += w * y * y;
                    sab += w * x * y;
                }
            saa -= ma * ma;
            sbb -= mb * mb;
            sab -= ma * mb;
            sum += (2 * ma * mb + c1) * (2 * sab + c2) / ((ma * ma + mb * mb + c1) * (saa + sbb + c2));
            ++count;
        }
    return sum / count;
}

inline Eigen::VectorXd encode_brute(const ShotGather& g, const PhiSpec& sp) {
    const auto S = g.sources(), T = g.samples(), R = g.receivers();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(S * sp.N);
    for (Eigen::Index s = 0; s < S; ++s)
        for (int n = 1; n <= sp.N; ++n)
            for (Eigen::Index t = 0; t < T; ++t)
                for (Eigen::Index r = 0; r < R; ++r)
                    u(s * sp.N + n - 1) += g.traces[static_cast<std::size_t>(s)](t, r) *
                                           phi_value(sp, n, (r + 0.5) / double(R), (t + 0.5) / double(T)) /
                                           (double(T) * double(R));
    return u;
}

inline Eigen::VectorXd embed_brute(const Gridd& y, const PsiSpec& sp) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(sp.M);
    const auto H = y.rows(), W = y.cols();
    for (int m = 1; m <= sp.M; ++m)
        for (Eigen::Index z = 0; z < H; ++z)
            for (Eigen::Index x = 0; x < W; ++x)
                out(m - 1) += y(z, x) * psi_value(sp, m, (x + 0.5) / double(W), (z + 0.5) / double(H)) / double(H * W);
    return out;
}

} // namespace invlint::testing
