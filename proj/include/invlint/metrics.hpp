#pragma once

#include "invlint/datagen.hpp"
#include "invlint/decoder.hpp"
#include "invlint/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace invlint {

struct MaeMse {
    double mae = 0.0;
    double mse = 0.0;
};

/// Pixel MAE / MSE after mapping both normalised grids back to [lo, hi].
template <typename DerivedA, typename DerivedB>
MaeMse mae_mse(const Eigen::MatrixBase<DerivedA>& pred, const Eigen::MatrixBase<DerivedB>& target, double lo,
               double hi) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw ConfigError("mae_mse shape mismatch");
    if (pred.size() == 0) throw ConfigError("mae_mse of empty grids");
    const Gridd diff =
        denormalize(pred.template cast<double>(), lo, hi) - denormalize(target.template cast<double>(), lo, hi);
    return {diff.cwiseAbs().mean(), diff.squaredNorm() / static_cast<double>(diff.size())};
}

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;
inline constexpr double kSsimRange = 2.0;  // inputs on [-1, 1]

/// Normalised 1-D Gaussian taps of the SSIM window.
Eigen::VectorXd ssim_window();

/// Mean SSIM over every fully contained 11 x 11 window (no padding).
double ssim(const Gridd& a, const Gridd& b);

template <typename DerivedA, typename DerivedB>
double ssim(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    return ssim(Gridd(a.template cast<double>()), Gridd(b.template cast<double>()));
}

/// Encoder map A is encoder_out x encoder_in (M x S N).
struct EncoderDims {
    std::int64_t in = 0;
    std::int64_t out = 0;
};

/// Weight and bias elements of A, L1, positional embedding, transformer blocks and L_r.
std::int64_t count_params(const DecoderConfig& cfg, EncoderDims enc);

/// FLOPs of one inference with a multiply-add counted as two. Counted: every
/// matrix product, bias add, the two residual adds per block, Q K^T and A V in
/// attention, and block stitching (one add per block cell, one divide per
/// output cell). Normalisation, softmax and GELU are not counted.
std::int64_t count_flops(const DecoderConfig& cfg, EncoderDims enc);

struct SampleScore {
    std::int64_t index = 0;
    double mae = 0.0;
    double mse = 0.0;
    double ssim = 0.0;
};

struct EvalReport {
    double mae = 0.0;   // m/s
    double mse = 0.0;   // (m/s)^2
    double ssim = 0.0;  // on the [-1, 1] scale
    std::int64_t n_params = 0;
    std::int64_t flops = 0;
    double baseline_mae = 0.0;  // predicting the training-set mean map
    std::vector<SampleScore> samples;

    nlohmann::json to_json() const;
    /// Header plus one row: mae,mse,ssim,n_params,flops,baseline_mae
    std::string summary_csv() const;
    /// Header plus one row per sample: index,mae,mse,ssim
    std::string samples_csv() const;
};

/// Scores normalised predictions against normalised targets. Sample metrics are
/// computed in parallel and averaged in index order.
EvalReport score_maps(const std::vector<Gridf>& pred, const std::vector<Gridf>& target,
                      const std::vector<std::int64_t>& indices, double lo, double hi);

} // namespace invlint
