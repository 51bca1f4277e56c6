#pragma once

// Shallow decoder: linear L1 from the property embedding to an h x w grid of
// k-channel tokens, learned positional embedding, `depth` pre-norm transformer
// blocks, and a final linear L_r that expands every token into a b x b block
// (b = patch + d). Blocks are placed at evenly spaced offsets and overlapping
// cells are averaged.
//
// Everything is templated on the scalar type; double is used for gradient
// checks and deterministic training. Tokens of a batch are stored token-major:
// row j * B + s holds token j of sample s.

#include "invlint/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace invlint {

struct DecoderConfig {
    int M = 144;
    int H = 64;
    int W = 64;
    int k = 64;
    int heads = 4;
    int mlp_ratio = 4;
    int depth = 1;
    int patch = 32;  // downsampling factor: h = ceil(H / patch)
    int d = 8;       // block overlap margin
    bool shared_final = true;

    int h() const { return (H + patch - 1) / patch; }
    int w() const { return (W + patch - 1) / patch; }
    int tokens() const { return h() * w(); }
    int block() const { return patch + d; }
    int hidden() const { return mlp_ratio * k; }
    std::vector<int> offsets_z() const { return offsets(H, h()); }
    std::vector<int> offsets_x() const { return offsets(W, w()); }

    /// Throws ConfigError for inconsistent shapes or blocks that leave cells uncovered.
    void validate() const;

private:
    std::vector<int> offsets(int extent, int count) const;
};

/// Per-cell number of blocks covering it.
Eigen::MatrixXi overlap_counts(const DecoderConfig& cfg);

template <typename S>
struct LayerParams {
    Mat<S> ln1_scale, ln1_bias;  // 1 x k
    Mat<S> wq, wk, wv, wo;       // k x k
    Mat<S> bq, bk, bv, bo;       // 1 x k
    Mat<S> ln2_scale, ln2_bias;  // 1 x k
    Mat<S> fc1, fc1_bias;        // k x hidden, 1 x hidden
    Mat<S> fc2, fc2_bias;        // hidden x k, 1 x k

    template <typename F>
    void visit(const std::string& prefix, F&& f) {
        f(prefix + "ln1.scale", ln1_scale, 0);
        f(prefix + "ln1.bias", ln1_bias, 0);
        f(prefix + "attn.q.weight", wq, static_cast<int>(wq.rows()));
        f(prefix + "attn.q.bias", bq, 0);
        f(prefix + "attn.k.weight", wk, static_cast<int>(wk.rows()));
        f(prefix + "attn.k.bias", bk, 0);
        f(prefix + "attn.v.weight", wv, static_cast<int>(wv.rows()));
        f(prefix + "attn.v.bias", bv, 0);
        f(prefix + "attn.out.weight", wo, static_cast<int>(wo.rows()));
        f(prefix + "attn.out.bias", bo, 0);
        f(prefix + "ln2.scale", ln2_scale, 0);
        f(prefix + "ln2.bias", ln2_bias, 0);
        f(prefix + "mlp.fc1.weight", fc1, static_cast<int>(fc1.rows()));
        f(prefix + "mlp.fc1.bias", fc1_bias, 0);
        f(prefix + "mlp.fc2.weight", fc2, static_cast<int>(fc2.rows()));
        f(prefix + "mlp.fc2.bias", fc2_bias, 0);
    }
};

/// Weights are stored (in x out) so a row of activations multiplies on the left.
template <typename S>
struct DecoderParams {
    Mat<S> l1, l1_bias;  // M x (n k), 1 x (n k)
    Mat<S> pos;          // n x k
    std::vector<LayerParams<S>> layers;
    std::vector<Mat<S>> lr, lr_bias;  // k x b^2, 1 x b^2; one entry, or one per token

    /// Calls f(name, tensor, fan_in) for every tensor in a fixed order; fan_in is 0 for
    /// biases, norms and embeddings.
    template <typename F>
    void visit(F&& f) {
        f(std::string("L1.weight"), l1, static_cast<int>(l1.rows()));
        f(std::string("L1.bias"), l1_bias, 0);
        f(std::string("pos_embedding"), pos, 0);
        for (std::size_t i = 0; i < layers.size(); ++i) layers[i].visit("layers." + std::to_string(i) + ".", f);
        for (std::size_t i = 0; i < lr.size(); ++i) {
            f("Lr." + std::to_string(i) + ".weight", lr[i], static_cast<int>(lr[i].rows()));
            f("Lr." + std::to_string(i) + ".bias", lr_bias[i], 0);
        }
    }
    template <typename F>
    void visit(F&& f) const {
        const_cast<DecoderParams*>(this)->visit([&](const std::string& name, Mat<S>& m, int fan_in) {
            f(name, static_cast<const Mat<S>&>(m), fan_in);
        });
    }

    std::int64_t numel() const {
        std::int64_t n = 0;
        visit([&](const std::string&, const Mat<S>& m, int) { n += m.size(); });
        return n;
    }

    /// Same shapes, all zeros.
    DecoderParams zeros_like() const {
        DecoderParams z = *this;
        z.visit([](const std::string&, Mat<S>& m, int) { m.setZero(); });
        return z;
    }

    template <typename T>
    DecoderParams<T> cast() const {
        DecoderParams<T> out;
        out.l1 = l1.template cast<T>();
        out.l1_bias = l1_bias.template cast<T>();
        out.pos = pos.template cast<T>();
        out.layers.resize(layers.size());
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const auto& a = layers[i];
            auto& b = out.layers[i];
            b = {a.ln1_scale.template cast<T>(), a.ln1_bias.template cast<T>(), a.wq.template cast<T>(),
                 a.wk.template cast<T>(),        a.wv.template cast<T>(),       a.wo.template cast<T>(),
                 a.bq.template cast<T>(),        a.bk.template cast<T>(),       a.bv.template cast<T>(),
                 a.bo.template cast<T>(),        a.ln2_scale.template cast<T>(), a.ln2_bias.template cast<T>(),
                 a.fc1.template cast<T>(),       a.fc1_bias.template cast<T>(), a.fc2.template cast<T>(),
                 a.fc2_bias.template cast<T>()};
        }
        for (std::size_t i = 0; i < lr.size(); ++i) {
            out.lr.push_back(lr[i].template cast<T>());
            out.lr_bias.push_back(lr_bias[i].template cast<T>());
        }
        return out;
    }
};

template <typename S>
using Gradients = DecoderParams<S>;

/// Allocates correctly shaped, zero-filled parameters.
template <typename S>
DecoderParams<S> zero_params(const DecoderConfig& cfg) {
    cfg.validate();
    const int n = cfg.tokens(), k = cfg.k, hid = cfg.hidden(), bb = cfg.block() * cfg.block();
    DecoderParams<S> p;
    p.l1 = Mat<S>::Zero(cfg.M, n * k);
    p.l1_bias = Mat<S>::Zero(1, n * k);
    p.pos = Mat<S>::Zero(n, k);
    p.layers.resize(static_cast<std::size_t>(cfg.depth));
    for (auto& l : p.layers) {
        l.ln1_scale = Mat<S>::Ones(1, k);
        l.ln1_bias = Mat<S>::Zero(1, k);
        l.wq = l.wk = l.wv = l.wo = Mat<S>::Zero(k, k);
        l.bq = l.bk = l.bv = l.bo = Mat<S>::Zero(1, k);
        l.ln2_scale = Mat<S>::Ones(1, k);
        l.ln2_bias = Mat<S>::Zero(1, k);
        l.fc1 = Mat<S>::Zero(k, hid);
        l.fc1_bias = Mat<S>::Zero(1, hid);
        l.fc2 = Mat<S>::Zero(hid, k);
        l.fc2_bias = Mat<S>::Zero(1, k);
    }
    const int copies = cfg.shared_final ? 1 : n;
    for (int i = 0; i < copies; ++i) {
        p.lr.push_back(Mat<S>::Zero(k, bb));
        p.lr_bias.push_back(Mat<S>::Zero(1, bb));
    }
    return p;
}

/// Linear weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases, layer-norm shifts and
/// positional embeddings zero; layer-norm scales one.
template <typename S>
DecoderParams<S> param_init(std::uint64_t seed, const DecoderConfig& cfg) {
    DecoderParams<S> p = zero_params<S>(cfg);
    std::mt19937_64 rng(seed);
    p.visit([&](const std::string&, Mat<S>& m, int fan_in) {
        if (fan_in <= 0) return;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<S>(dist(rng));
    });
    return p;
}

namespace detail {

inline constexpr double kLayerNormEps = 1e-5;

template <typename S>
S gelu(S x) {
    return S(0.5) * x * (S(1) + std::erf(x / S(std::numbers::sqrt2)));
}

template <typename S>
S gelu_grad(S x) {
    const S cdf = S(0.5) * (S(1) + std::erf(x / S(std::numbers::sqrt2)));
    const S pdf = std::exp(S(-0.5) * x * x) / S(std::sqrt(2.0 * std::numbers::pi));
    return cdf + x * pdf;
}

/// Row-wise normalisation; returns xhat and fills the reciprocal std per row.
template <typename S>
Mat<S> layer_norm(const Mat<S>& x, Vec<S>& rstd) {
    const Eigen::Index n = x.rows();
    const S inv_k = S(1) / S(x.cols());
    Mat<S> xhat(x.rows(), x.cols());
    rstd.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const S mean = x.row(i).sum() * inv_k;
        const S var = (x.row(i).array() - mean).square().sum() * inv_k;
        rstd(i) = S(1) / std::sqrt(var + S(kLayerNormEps));
        xhat.row(i) = (x.row(i).array() - mean) * rstd(i);
    }
    return xhat;
}

template <typename S>
Mat<S> layer_norm_backward(const Mat<S>& dxhat, const Mat<S>& xhat, const Vec<S>& rstd) {
    const S inv_k = S(1) / S(xhat.cols());
    Mat<S> dx(dxhat.rows(), dxhat.cols());
    for (Eigen::Index i = 0; i < dxhat.rows(); ++i) {
        const S m1 = dxhat.row(i).sum() * inv_k;
        const S m2 = dxhat.row(i).dot(xhat.row(i)) * inv_k;
        dx.row(i) = rstd(i) * (dxhat.row(i).array() - m1 - xhat.row(i).array() * m2);
    }
    return dx;
}

template <typename S>
Mat<S> affine(const Mat<S>& x, const Mat<S>& w, const Mat<S>& b) {
    Mat<S> out = x * w;
    out.rowwise() += b.row(0);
    return out;
}

} // namespace detail

template <typename S>
struct AttentionCache {
    Mat<S> q, key, val, concat;  // n x k
    std::vector<Mat<S>> probs;   // per head, n x n
};

/// Everything the backward pass needs from one transformer block.
template <typename S>
struct LayerCache {
    Mat<S> xhat1, h1, x_mid, xhat2, h2, f1, g;
    Vec<S> rstd1, rstd2;
    std::vector<AttentionCache<S>> attn;  // per sample
};

template <typename S>
struct DecoderCache {
    Eigen::Index batch = 0;
    Mat<S> y;  // B x M
    std::vector<LayerCache<S>> layers;
    Mat<S> x_final;  // (n B) x k
    bool valid = false;
};

/// Softmax(Q K^T / sqrt(k / heads)) V per head, concatenated, then output-projected.
/// `tokens` is n x k for a single sample.
template <typename S>
Mat<S> attention_forward(const Mat<S>& tokens, const LayerParams<S>& p, int heads, AttentionCache<S>* cache = nullptr) {
    const Eigen::Index n = tokens.rows(), k = tokens.cols();
    if (heads < 1 || k % heads != 0) throw ConfigError("channel count must be divisible by the head count");
    const Eigen::Index dh = k / heads;
    const S scale = S(1) / std::sqrt(S(dh));
    AttentionCache<S> local;
    AttentionCache<S>& c = cache ? *cache : local;
    c.q = detail::affine(tokens, p.wq, p.bq);
    c.key = detail::affine(tokens, p.wk, p.bk);
    c.val = detail::affine(tokens, p.wv, p.bv);
    c.concat.resize(n, k);
    c.probs.clear();
    for (int h = 0; h < heads; ++h) {
        Mat<S> a = c.q.middleCols(h * dh, dh) * c.key.middleCols(h * dh, dh).transpose() * scale;
        for (Eigen::Index i = 0; i < n; ++i) {
            a.row(i).array() -= a.row(i).maxCoeff();
            a.row(i) = a.row(i).array().exp();
            a.row(i) /= a.row(i).sum();
        }
        c.concat.middleCols(h * dh, dh) = a * c.val.middleCols(h * dh, dh);
        c.probs.push_back(std::move(a));
    }
    return detail::affine(c.concat, p.wo, p.bo);
}

/// Reverse of attention_forward; accumulates into the attention entries of `g`
/// and returns d(tokens).
template <typename S>
Mat<S> attention_backward(const Mat<S>& dout, const Mat<S>& tokens, const AttentionCache<S>& c, const LayerParams<S>& p,
                          LayerParams<S>& g) {
    const Eigen::Index n = tokens.rows(), k = tokens.cols();
    const auto heads = static_cast<Eigen::Index>(c.probs.size());
    const Eigen::Index dh = k / heads;
    const S scale = S(1) / std::sqrt(S(dh));
    g.wo.noalias() += c.concat.transpose() * dout;
    g.bo += dout.colwise().sum();
    const Mat<S> dconcat = dout * p.wo.transpose();
    Mat<S> dq(n, k), dk(n, k), dv(n, k);
    for (Eigen::Index h = 0; h < heads; ++h) {
        const Mat<S>& a = c.probs[static_cast<std::size_t>(h)];
        const auto dO = dconcat.middleCols(h * dh, dh);
        dv.middleCols(h * dh, dh) = a.transpose() * dO;
        const Mat<S> da = dO * c.val.middleCols(h * dh, dh).transpose();
        Mat<S> dscore(n, n);
        for (Eigen::Index i = 0; i < n; ++i) dscore.row(i) = a.row(i).array() * (da.row(i).array() - da.row(i).dot(a.row(i)));
        dscore *= scale;
        dq.middleCols(h * dh, dh) = dscore * c.key.middleCols(h * dh, dh);
        dk.middleCols(h * dh, dh) = dscore.transpose() * c.q.middleCols(h * dh, dh);
    }
    g.wq.noalias() += tokens.transpose() * dq;
    g.wk.noalias() += tokens.transpose() * dk;
    g.wv.noalias() += tokens.transpose() * dv;
    g.bq += dq.colwise().sum();
    g.bk += dk.colwise().sum();
    g.bv += dv.colwise().sum();
    return dq * p.wq.transpose() + dk * p.wk.transpose() + dv * p.wv.transpose();
}

template <typename S>
class Decoder {
public:
    explicit Decoder(DecoderConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        counts_ = overlap_counts(cfg_);
        oz_ = cfg_.offsets_z();
        ox_ = cfg_.offsets_x();
    }

    const DecoderConfig& config() const { return cfg_; }

    /// y is B x M (one embedding per row). Returns B maps, each H x W.
    std::vector<Grid<S>> forward(const Mat<S>& y, const DecoderParams<S>& p, DecoderCache<S>* cache = nullptr) const {
        if (y.cols() != cfg_.M)
            throw ConfigError("decoder expects embeddings of length " + std::to_string(cfg_.M) + ", got " +
                              std::to_string(y.cols()));
        check_shapes(p);
        const Eigen::Index B = y.rows();
        const int n = cfg_.tokens(), k = cfg_.k, heads = cfg_.heads;

        const Mat<S> z = detail::affine(y, p.l1, p.l1_bias);  // B x nk
        Mat<S> x(n * B, k);
        for (int j = 0; j < n; ++j) {
            x.middleRows(j * B, B) = z.middleCols(j * k, k);
            x.middleRows(j * B, B).rowwise() += p.pos.row(j);
        }
        if (cache) {
            cache->batch = B;
            cache->y = y;
            cache->layers.assign(p.layers.size(), {});
        }

        for (std::size_t li = 0; li < p.layers.size(); ++li) {
            const auto& L = p.layers[li];
            LayerCache<S> lc;
            lc.xhat1 = detail::layer_norm(x, lc.rstd1);
            lc.h1 = lc.xhat1.array().rowwise() * L.ln1_scale.row(0).array();
            lc.h1.rowwise() += L.ln1_bias.row(0);
            Mat<S> attn_out(n * B, k);
            lc.attn.resize(static_cast<std::size_t>(B));
            for (Eigen::Index s = 0; s < B; ++s) {
                const Mat<S> out = attention_forward(gather_sample(lc.h1, s, B), L, heads, &lc.attn[static_cast<std::size_t>(s)]);
                scatter_sample(out, s, B, attn_out);
            }
            lc.x_mid = x + attn_out;
            lc.xhat2 = detail::layer_norm(lc.x_mid, lc.rstd2);
            lc.h2 = lc.xhat2.array().rowwise() * L.ln2_scale.row(0).array();
            lc.h2.rowwise() += L.ln2_bias.row(0);
            lc.f1 = detail::affine(lc.h2, L.fc1, L.fc1_bias);
            lc.g = lc.f1.unaryExpr([](S v) { return detail::gelu(v); });
            x = lc.x_mid + detail::affine(lc.g, L.fc2, L.fc2_bias);
            if (cache) cache->layers[li] = std::move(lc);
        }

        const int b = cfg_.block();
        std::vector<Grid<S>> out(static_cast<std::size_t>(B), Grid<S>::Zero(cfg_.H, cfg_.W));
        for (int j = 0; j < n; ++j) {
            const std::size_t w = cfg_.shared_final ? 0 : static_cast<std::size_t>(j);
            const Mat<S> blocks = detail::affine(Mat<S>(x.middleRows(j * B, B)), p.lr[w], p.lr_bias[w]);  // B x b^2
            const int z0 = oz_[static_cast<std::size_t>(j / cfg_.w())];
            const int x0 = ox_[static_cast<std::size_t>(j % cfg_.w())];
            for (Eigen::Index s = 0; s < B; ++s)
                for (int r = 0; r < b; ++r)
                    for (int c = 0; c < b; ++c) out[static_cast<std::size_t>(s)](z0 + r, x0 + c) += blocks(s, r * b + c);
        }
        for (auto& o : out) o.array() /= counts_.cast<S>().array();
        if (cache) {
            cache->x_final = std::move(x);
            cache->valid = true;
        }
        return out;
    }

    /// Reverse pass for dL/d(output). Accumulates parameter gradients into `grads`
    /// (shape-congruent with params) and returns dL/dy (B x M).
    Mat<S> backward(const std::vector<Grid<S>>& dout, const DecoderCache<S>& cache, const DecoderParams<S>& p,
                    Gradients<S>& grads) const {
        if (!cache.valid) throw ConfigError("decoder backward called without a forward cache");
        const Eigen::Index B = cache.batch;
        if (static_cast<Eigen::Index>(dout.size()) != B) throw ConfigError("output gradient batch size mismatch");
        const int n = cfg_.tokens(), k = cfg_.k, b = cfg_.block();

        // stitching and L_r
        Mat<S> dx(n * B, k);
        for (int j = 0; j < n; ++j) {
            const std::size_t w = cfg_.shared_final ? 0 : static_cast<std::size_t>(j);
            const int z0 = oz_[static_cast<std::size_t>(j / cfg_.w())];
            const int x0 = ox_[static_cast<std::size_t>(j % cfg_.w())];
            Mat<S> dblocks(B, b * b);
            for (Eigen::Index s = 0; s < B; ++s) {
                const auto& g = dout[static_cast<std::size_t>(s)];
                if (g.rows() != cfg_.H || g.cols() != cfg_.W) throw ConfigError("output gradient shape mismatch");
                for (int r = 0; r < b; ++r)
                    for (int c = 0; c < b; ++c)
                        dblocks(s, r * b + c) = g(z0 + r, x0 + c) / S(counts_(z0 + r, x0 + c));
            }
            const auto xj = cache.x_final.middleRows(j * B, B);
            grads.lr[w].noalias() += xj.transpose() * dblocks;
            grads.lr_bias[w] += dblocks.colwise().sum();
            dx.middleRows(j * B, B).noalias() = dblocks * p.lr[w].transpose();
        }

        for (std::size_t li = p.layers.size(); li-- > 0;) {
            const auto& L = p.layers[li];
            auto& G = grads.layers[li];
            const auto& lc = cache.layers[li];

            // MLP branch: x = x_mid + fc2(gelu(fc1(ln2(x_mid))))
            G.fc2.noalias() += lc.g.transpose() * dx;
            G.fc2_bias += dx.colwise().sum();
            Mat<S> df1 = (dx * L.fc2.transpose()).array() * lc.f1.unaryExpr([](S v) { return detail::gelu_grad(v); }).array();
            G.fc1.noalias() += lc.h2.transpose() * df1;
            G.fc1_bias += df1.colwise().sum();
            const Mat<S> dh2 = df1 * L.fc1.transpose();
            G.ln2_scale += (dh2.array() * lc.xhat2.array()).colwise().sum().matrix();
            G.ln2_bias += dh2.colwise().sum();
            const Mat<S> dxhat2 = dh2.array().rowwise() * L.ln2_scale.row(0).array();
            Mat<S> dxmid = dx + detail::layer_norm_backward(dxhat2, lc.xhat2, lc.rstd2);

            // attention branch: x_mid = x_in + out(attn(ln1(x_in)))
            Mat<S> dh1(n * B, k);
            for (Eigen::Index s = 0; s < B; ++s) {
                const Mat<S> d = attention_backward(gather_sample(dxmid, s, B), gather_sample(lc.h1, s, B),
                                                    lc.attn[static_cast<std::size_t>(s)], L, G);
                scatter_sample(d, s, B, dh1);
            }
            G.ln1_scale += (dh1.array() * lc.xhat1.array()).colwise().sum().matrix();
            G.ln1_bias += dh1.colwise().sum();
            const Mat<S> dxhat1 = dh1.array().rowwise() * L.ln1_scale.row(0).array();
            dx = dxmid + detail::layer_norm_backward(dxhat1, lc.xhat1, lc.rstd1);
        }

        // positional embedding and L1
        Mat<S> dz(B, n * k);
        for (int j = 0; j < n; ++j) {
            grads.pos.row(j) += dx.middleRows(j * B, B).colwise().sum();
            dz.middleCols(j * k, k) = dx.middleRows(j * B, B);
        }
        grads.l1.noalias() += cache.y.transpose() * dz;
        grads.l1_bias += dz.colwise().sum();
        return dz * p.l1.transpose();
    }

    void check_shapes(const DecoderParams<S>& p) const {
        const DecoderParams<S> ref = zero_params<S>(cfg_);
        if (p.layers.size() != ref.layers.size() || p.lr.size() != ref.lr.size())
            throw ConfigError("decoder parameters do not match the configuration");
        std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
        ref.visit([&](const std::string&, const Mat<S>& m, int) { shapes.emplace_back(m.rows(), m.cols()); });
        std::size_t i = 0;
        p.visit([&](const std::string& name, const Mat<S>& m, int) {
            if (shapes[i].first != m.rows() || shapes[i].second != m.cols())
                throw ConfigError("parameter " + name + " has the wrong shape");
            ++i;
        });
    }

private:
    // Rows of one sample from a token-major (n B) x k activation.
    static Mat<S> gather_sample(const Mat<S>& x, Eigen::Index s, Eigen::Index B) {
        const Eigen::Index n = x.rows() / B;
        Mat<S> out(n, x.cols());
        for (Eigen::Index j = 0; j < n; ++j) out.row(j) = x.row(j * B + s);
        return out;
    }
    static void scatter_sample(const Mat<S>& rows, Eigen::Index s, Eigen::Index B, Mat<S>& x) {
        for (Eigen::Index j = 0; j < rows.rows(); ++j) x.row(j * B + s) = rows.row(j);
    }

    DecoderConfig cfg_;
    Eigen::MatrixXi counts_;
    std::vector<int> oz_, ox_;
};

/// Single-sample convenience wrapper.
template <typename S, typename Derived>
Grid<S> decoder_forward(const Eigen::MatrixBase<Derived>& y, const DecoderParams<S>& params, const DecoderConfig& cfg,
                        DecoderCache<S>* cache = nullptr) {
    const Mat<S> row = y.template cast<S>().reshaped(1, y.size());
    return Decoder<S>(cfg).forward(row, params, cache).front();
}

} // namespace invlint
