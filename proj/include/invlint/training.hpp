#pragma once

#include "invlint/decoder.hpp"
#include "invlint/types.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace invlint {

struct TrainConfig {
    double lr_max = 1e-3;
    double lr_min = 1e-5;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
    int batch_size = 32;
    int epochs = 60;
    int T0 = 5;
    int T_mult = 2;
    std::uint64_t seed = 0;
    bool deterministic = false;

    void validate() const;
};

/// Mean |pred - target|. When `grad` is given it receives sign(pred - target) / count.
template <typename S>
S mae_loss(const Grid<S>& pred, const Grid<S>& target, Grid<S>* grad = nullptr) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw ConfigError("mae_loss shape mismatch");
    const Grid<S> diff = pred - target;
    if (grad) *grad = diff.array().sign() / S(diff.size());
    return diff.cwiseAbs().sum() / S(diff.size());
}

/// SGDR: cosine annealing from lr_max to lr_min within cycles of length T0 * T_mult^i.
double cosine_restart_lr(int epoch, int T0, int T_mult, double lr_max, double lr_min);

template <typename S>
struct OptState {
    DecoderParams<S> m;
    DecoderParams<S> v;
    std::int64_t step = 0;

    static OptState zeros_like(const DecoderParams<S>& p) { return {p.zeros_like(), p.zeros_like(), 0}; }
};

/// One AdamW update of a single tensor; `step` is the 1-based step count.
template <typename S>
void adamw_update(Mat<S>& theta, const Mat<S>& g, Mat<S>& m, Mat<S>& v, std::int64_t step, double lr,
                  const TrainConfig& cfg) {
    const S b1 = S(cfg.beta1), b2 = S(cfg.beta2);
    m = b1 * m + (S(1) - b1) * g;
    v = b2 * v + (S(1) - b2) * g.cwiseAbs2();
    const S c1 = S(1) - std::pow(b1, S(step));
    const S c2 = S(1) - std::pow(b2, S(step));
    const S decay = S(lr * cfg.weight_decay);
    theta = theta - S(lr) * ((m.array() / c1) / ((v.array() / c2).sqrt() + S(cfg.eps))).matrix() - decay * theta;
}

/// AdamW with decoupled weight decay over every parameter tensor.
template <typename S>
void adamw_step(DecoderParams<S>& params, const Gradients<S>& grads, OptState<S>& state, double lr,
                const TrainConfig& cfg) {
    std::vector<std::pair<std::string, Mat<S>*>> p, m, v;
    std::vector<const Mat<S>*> g;
    params.visit([&](const std::string& name, Mat<S>& t, int) { p.emplace_back(name, &t); });
    state.m.visit([&](const std::string& name, Mat<S>& t, int) { m.emplace_back(name, &t); });
    state.v.visit([&](const std::string& name, Mat<S>& t, int) { v.emplace_back(name, &t); });
    grads.visit([&](const std::string&, const Mat<S>& t, int) { g.push_back(&t); });
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size())
        throw ConfigError("optimizer state is not congruent with the parameters");
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (g[i]->rows() != p[i].second->rows() || g[i]->cols() != p[i].second->cols())
            throw ConfigError("gradient shape mismatch at " + p[i].first);
        if (!g[i]->allFinite()) throw NumericError("non-finite gradient in " + p[i].first);
    }
    ++state.step;
    for (std::size_t i = 0; i < p.size(); ++i)
        adamw_update(*p[i].second, *g[i], *m[i].second, *v[i].second, state.step, lr, cfg);
}

/// Inputs are embeddings (rows) paired with normalised target maps.
struct TrainData {
    Eigen::MatrixXd y_train;
    std::vector<Gridf> target_train;
    Eigen::MatrixXd y_val;
    std::vector<Gridf> target_val;
};

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;
    double train_mae = 0.0;
    double val_mae = 0.0;  // NaN without a validation split
    double wall_seconds = 0.0;
};

template <typename S>
struct TrainResult {
    DecoderParams<S> best;
    DecoderParams<S> last;
    int best_epoch = -1;
    std::vector<EpochLog> log;
};

/// Mean pixel MAE of the decoder over a set, evaluated in batches.
template <typename S>
double evaluate_mae(const Decoder<S>& dec, const DecoderParams<S>& params, const Eigen::MatrixXd& y,
                    const std::vector<Gridf>& targets, int batch_size = 64) {
    if (y.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (Eigen::Index begin = 0; begin < y.rows(); begin += batch_size) {
        const Eigen::Index count = std::min<Eigen::Index>(batch_size, y.rows() - begin);
        const auto out = dec.forward(y.middleRows(begin, count).template cast<S>(), params);
        for (Eigen::Index s = 0; s < count; ++s)
            total += static_cast<double>(
                mae_loss<S>(out[static_cast<std::size_t>(s)], targets[static_cast<std::size_t>(begin + s)].template cast<S>()));
    }
    return total / static_cast<double>(y.rows());
}

/// Mini-batch AdamW on the pixel MAE with a per-epoch SGDR learning rate.
/// `on_best` fires whenever the validation MAE (train MAE without a validation
/// set) improves, so the last good parameters are on disk if training diverges.
template <typename S>
TrainResult<S> train_decoder(const TrainData& data, const DecoderConfig& dcfg, const TrainConfig& cfg,
                             const std::function<void(const DecoderParams<S>&, int)>& on_best = {}) {
    cfg.validate();
    if (data.y_train.rows() != static_cast<Eigen::Index>(data.target_train.size()) ||
        data.y_val.rows() != static_cast<Eigen::Index>(data.target_val.size()))
        throw ConfigError("embedding and target counts differ");
    const Decoder<S> dec(dcfg);
    TrainResult<S> result;
    result.last = param_init<S>(cfg.seed, dcfg);
    result.best = result.last;
    OptState<S> state = OptState<S>::zeros_like(result.last);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.y_train.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    double best_score = std::numeric_limits<double>::infinity();
    const auto start = std::chrono::steady_clock::now();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_restart_lr(epoch, cfg.T0, cfg.T_mult, cfg.lr_max, cfg.lr_min);
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t count = std::min(order.size() - begin, static_cast<std::size_t>(cfg.batch_size));
            Mat<S> y(static_cast<Eigen::Index>(count), data.y_train.cols());
            for (std::size_t s = 0; s < count; ++s)
                y.row(static_cast<Eigen::Index>(s)) = data.y_train.row(order[begin + s]).template cast<S>();
            DecoderCache<S> cache;
            const auto out = dec.forward(y, result.last, &cache);
            std::vector<Grid<S>> dout(count);
            double batch_loss = 0.0;
            for (std::size_t s = 0; s < count; ++s) {
                const Grid<S> target = data.target_train[static_cast<std::size_t>(order[begin + s])].template cast<S>();
                batch_loss += static_cast<double>(mae_loss<S>(out[s], target, &dout[s]));
                dout[s] /= S(count);
            }
            if (!std::isfinite(batch_loss))
                throw NumericError("training diverged (non-finite loss) in epoch " + std::to_string(epoch));
            loss_sum += batch_loss;
            Gradients<S> grads = result.last.zeros_like();
            dec.backward(dout, cache, result.last, grads);
            adamw_step(result.last, grads, state, lr, cfg);
        }
        EpochLog entry;
        entry.epoch = epoch + 1;
        entry.lr = lr;
        entry.train_mae = loss_sum / static_cast<double>(order.size());
        entry.val_mae = evaluate_mae(dec, result.last, data.y_val, data.target_val);
        entry.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.log.push_back(entry);
        const double score = std::isnan(entry.val_mae) ? entry.train_mae : entry.val_mae;
        if (score < best_score) {
            best_score = score;
            result.best = result.last;
            result.best_epoch = entry.epoch;
            if (on_best) on_best(result.best, entry.epoch);
        }
    }
    return result;
}

} // namespace invlint
