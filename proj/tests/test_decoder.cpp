#include "invlint/decoder.hpp"
#include "invlint/training.hpp"

#include "gradcheck.hpp"

#include <doctest.h>

using namespace invlint;

namespace {

DecoderConfig tiny() {
    DecoderConfig c;
    c.M = 6;
    c.H = c.W = 8;
    c.k = 4;
    c.heads = 2;
    c.patch = 8;
    c.d = 0;
    return c;
}

} // namespace

TEST_CASE("default geometry") {
    const DecoderConfig c;
    CHECK(c.h() == 2);
    CHECK(c.tokens() == 4);
    CHECK(c.block() == 40);
    CHECK(c.offsets_z() == std::vector<int>{0, 24});
    const Eigen::MatrixXi counts = overlap_counts(c);
    CHECK(counts(0, 0) == 1);
    CHECK(counts(30, 30) == 4);
    CHECK(counts(30, 5) == 2);
    CHECK(counts.maxCoeff() == 4);
}

TEST_CASE("invalid decoder configs") {
    DecoderConfig c;
    c.k = 10;
    c.heads = 4;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.d = 40;  // block 72 > 64
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny();
    c.patch = 16;  // one 16-cell block on an 8-cell map
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("forward shapes and finiteness") {
    const DecoderConfig c;
    const auto p = param_init<float>(3, c);
    CHECK(p.numel() == zero_params<float>(c).numel());
    const Decoder<float> dec(c);
    const auto out = dec.forward(Mat<float>::Random(3, c.M), p);
    REQUIRE(out.size() == 3);
    CHECK(out[0].rows() == 64);
    CHECK(out[2].cols() == 64);
    CHECK(out[1].allFinite());
    CHECK_THROWS_AS(dec.forward(Mat<float>::Random(1, c.M + 1), p), ConfigError);
    auto bad = p;
    bad.pos.resize(3, 3);
    CHECK_THROWS_AS(dec.forward(Mat<float>::Random(1, c.M), bad), ConfigError);
}

TEST_CASE("batched forward equals per-sample forward") {
    DecoderConfig c = tiny();
    c.patch = 4;
    c.d = 2;
    const auto p = param_init<double>(8, c);
    const Mat<double> y = Mat<double>::Random(4, c.M);
    const auto batched = Decoder<double>(c).forward(y, p);
    for (int s = 0; s < 4; ++s) CHECK((decoder_forward(y.row(s), p, c) - batched[s]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("param_init is seeded and fan-in bounded") {
    const DecoderConfig c = tiny();
    const auto a = param_init<double>(1, c), b = param_init<double>(1, c), d = param_init<double>(2, c);
    CHECK(a.l1 == b.l1);
    CHECK(a.l1 != d.l1);
    CHECK(a.l1.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(6.0));
    CHECK((a.layers[0].ln1_scale.array() == 1.0).all());
}

TEST_CASE("gradients match finite differences on the tiny config") {
    const auto r = testing::check_decoder_gradients(tiny(), 17, 2);
    CAPTURE(r.worst);
    CHECK(r.checked > 600);
    CHECK(r.max_rel < 1e-4);
}

TEST_CASE("entrywise gradient error shrinks with the step") {
    const auto coarse = testing::check_decoder_gradients(tiny(), 2024, 2, 1e-3);
    const auto fine = testing::check_decoder_gradients(tiny(), 2024, 2, 1e-4);
    CHECK(fine.max_rel_entry < 1e-5);
    CHECK(fine.max_rel_entry < coarse.max_rel_entry / 50);
}

TEST_CASE("gradients with overlapping blocks, unshared L_r and two layers") {
    DecoderConfig c = tiny();
    c.patch = 3;
    c.d = 2;
    c.depth = 2;
    c.shared_final = false;
    const auto r = testing::check_decoder_gradients(c, 23, 2);
    CAPTURE(r.worst);
    CHECK(r.max_rel < 1e-4);
}

TEST_CASE("L_r bias gradient under MAE on a constant target") {
    const DecoderConfig c = tiny();
    const auto p = param_init<double>(5, c);
    const Decoder<double> dec(c);
    DecoderCache<double> cache;
    const auto out = dec.forward(Mat<double>::Random(1, c.M), p, &cache);
    std::vector<Grid<double>> dout(1);
    mae_loss<double>(out[0], Grid<double>::Constant(8, 8, 10.0), &dout[0]);
    auto g = p.zeros_like();
    dec.backward(dout, cache, p, g);
    CHECK((g.lr_bias[0].array() == -1.0 / 64).all());
    mae_loss<double>(out[0], Grid<double>::Constant(8, 8, -10.0), &dout[0]);
    g = p.zeros_like();
    dec.backward(dout, cache, p, g);
    CHECK((g.lr_bias[0].array() == 1.0 / 64).all());
}

TEST_CASE("backward without a cache is rejected") {
    const DecoderConfig c = tiny();
    const auto p = param_init<double>(5, c);
    auto g = p.zeros_like();
    CHECK_THROWS_AS(Decoder<double>(c).backward({}, DecoderCache<double>{}, p, g), ConfigError);
}

TEST_CASE("attention rows are convex combinations") {
    const DecoderConfig c = tiny();
    LayerParams<double> L = param_init<double>(2, c).layers[0];
    AttentionCache<double> cache;
    attention_forward<double>(Mat<double>::Random(5, 4), L, 2, &cache);
    REQUIRE(cache.probs.size() == 2);
    for (const auto& pr : cache.probs) {
        CHECK((pr.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(pr.minCoeff() >= 0.0);
    }
}
