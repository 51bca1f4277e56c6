#include "invlint/training.hpp"

#include <doctest.h>

#include <random>

using namespace invlint;

namespace {

DecoderConfig toy_decoder() {
    DecoderConfig c;
    c.M = 6;
    c.H = c.W = 8;
    c.k = 8;
    c.heads = 2;
    c.patch = 4;
    c.d = 2;
    return c;
}

// Targets are a fixed smooth function of the input embedding.
TrainData toy_data(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TrainData d;
    d.y_train.resize(n, 6);
    for (auto& v : d.y_train.reshaped()) v = u(rng);
    for (int i = 0; i < n; ++i) {
        Gridf t(8, 8);
        for (int z = 0; z < 8; ++z)
            for (int x = 0; x < 8; ++x)
                t(z, x) = static_cast<float>(0.5 * std::tanh(d.y_train(i, 0) * (z - 3.5) / 4 + d.y_train(i, 1) * (x - 3.5) / 4));
        d.target_train.push_back(t);
    }
    d.y_val.resize(0, 6);
    return d;
}

} // namespace

TEST_CASE("mae loss and gradient") {
    Grid<double> a = Grid<double>::Random(5, 5);
    CHECK(mae_loss<double>(a, a) == 0.0);
    Grid<double> shifted = (a.array() + 0.3).matrix();
    Grid<double> g;
    CHECK(mae_loss<double>(shifted, a, &g) == doctest::Approx(0.3));
    CHECK((g.array() == 1.0 / 25).all());

    const Grid<double> b = Grid<double>::Random(5, 5);
    double ref = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) ref += std::abs(a(i, j) - b(i, j)) / 25.0;
    CHECK(std::abs(mae_loss<double>(a, b) - ref) < 1e-9);
    mae_loss<double>(a, a, &g);
    CHECK(g.isZero());
    CHECK_THROWS_AS(mae_loss<double>(a, Grid<double>(4, 5)), ConfigError);
}

TEST_CASE("adamw single step") {
    TrainConfig cfg;
    cfg.lr_max = 1e-3;
    cfg.weight_decay = 1e-4;

    Mat<double> theta = Mat<double>::Constant(2, 2, 1.5), g = Mat<double>::Zero(2, 2);
    Mat<double> m = Mat<double>::Zero(2, 2), v = m;
    adamw_update(theta, g, m, v, 1, 1e-3, cfg);
    CHECK((theta.array() == 1.5 * (1 - 1e-3 * 1e-4)).all());

    TrainConfig nodecay = cfg;
    nodecay.weight_decay = 0.0;
    Mat<double> still = Mat<double>::Constant(1, 3, -2.0), zero = Mat<double>::Zero(1, 3), m2 = zero, v2 = zero;
    adamw_update(still, zero, m2, v2, 1, 1e-3, nodecay);
    CHECK((still.array() == -2.0).all());

    // theta = 1, g = 0.5: m_hat = 0.5, v_hat = 0.25
    Mat<double> t1 = Mat<double>::Constant(1, 1, 1.0), g1 = Mat<double>::Constant(1, 1, 0.5);
    Mat<double> m1 = Mat<double>::Zero(1, 1), v1 = m1;
    adamw_update(t1, g1, m1, v1, 1, 1e-3, cfg);
    const long double expect = 1.0L - 1e-3L * (0.5L / (0.5L + 1e-8L)) - 1e-3L * 1e-4L;
    CHECK(std::abs(static_cast<long double>(t1(0, 0)) - expect) < 1e-15L);
}

TEST_CASE("adamw two steps against the recursion") {
    TrainConfig cfg;
    const double lr = 3e-3, g = -0.7;
    Mat<double> theta = Mat<double>::Constant(1, 1, 0.4), grad = Mat<double>::Constant(1, 1, g);
    Mat<double> m = Mat<double>::Zero(1, 1), v = m;
    adamw_update(theta, grad, m, v, 1, lr, cfg);
    adamw_update(theta, grad, m, v, 2, lr, cfg);

    long double th = 0.4L, mm = 0, vv = 0;
    const long double b1 = cfg.beta1, b2 = cfg.beta2;
    for (int t = 1; t <= 2; ++t) {
        mm = b1 * mm + (1 - b1) * g;
        vv = b2 * vv + (1 - b2) * static_cast<long double>(g) * g;
        const long double mh = mm / (1 - std::pow(b1, t)), vh = vv / (1 - std::pow(b2, t));
        th = th - lr * mh / (std::sqrt(vh) + cfg.eps) - lr * cfg.weight_decay * th;
    }
    CHECK(std::abs(static_cast<long double>(theta(0, 0)) - th) < 1e-12L);
    CHECK(std::abs(static_cast<long double>(m(0, 0)) - mm) < 1e-12L);
    CHECK(std::abs(static_cast<long double>(v(0, 0)) - vv) < 1e-12L);
}

TEST_CASE("adamw_step names the offending parameter") {
    const DecoderConfig c = toy_decoder();
    auto p = param_init<double>(1, c);
    auto g = p.zeros_like();
    g.layers[0].fc1(0, 0) = std::numeric_limits<double>::quiet_NaN();
    auto st = OptState<double>::zeros_like(p);
    try {
        adamw_step(p, g, st, 1e-3, TrainConfig{});
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("layers.0.mlp.fc1.weight") != std::string::npos);
    }
    CHECK(st.step == 0);
}

TEST_CASE("cosine schedule with warm restarts") {
    const double hi = 1e-3, lo = 1e-5;
    CHECK(cosine_restart_lr(0, 5, 2, hi, lo) == hi);
    CHECK(cosine_restart_lr(5, 5, 2, hi, lo) == hi);
    CHECK(cosine_restart_lr(15, 5, 2, hi, lo) == hi);
    CHECK(cosine_restart_lr(35, 5, 2, hi, lo) == hi);
    CHECK(cosine_restart_lr(10, 5, 2, hi, lo) == doctest::Approx((hi + lo) / 2).epsilon(1e-12));
    CHECK(cosine_restart_lr(4, 5, 2, hi, lo) < cosine_restart_lr(3, 5, 2, hi, lo));
    for (int e = 0; e < 100; ++e) CHECK(cosine_restart_lr(e, 5, 2, hi, lo) >= lo);
    CHECK(cosine_restart_lr(7, 5, 1, hi, lo) == cosine_restart_lr(2, 5, 1, hi, lo));
    CHECK_THROWS_AS(cosine_restart_lr(-1, 5, 2, hi, lo), ConfigError);
}

TEST_CASE("train config validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.lr_min = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.beta1 = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.T_mult = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("zero epochs returns the initial parameters") {
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 9;
    const auto r = train_decoder<double>(toy_data(8, 1), toy_decoder(), cfg);
    CHECK(r.log.empty());
    const auto init = param_init<double>(9, toy_decoder());
    CHECK(r.last.l1 == init.l1);
    CHECK(r.best.lr[0] == init.lr[0]);
}

TEST_CASE("training makes progress and is reproducible") {
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 16;
    cfg.seed = 4;
    cfg.deterministic = true;
    const TrainData data = toy_data(200, 2);
    const auto a = train_decoder<double>(data, toy_decoder(), cfg);
    REQUIRE(a.log.size() == 30);
    CHECK(a.log.back().train_mae < a.log.front().train_mae);
    const auto b = train_decoder<double>(data, toy_decoder(), cfg);
    CHECK(a.last.l1 == b.last.l1);
    CHECK(a.last.layers[0].wq == b.last.layers[0].wq);
    CHECK(a.last.lr[0] == b.last.lr[0]);
    CHECK(a.best_epoch == b.best_epoch);
}

TEST_CASE("loss on a fixed batch falls over the first steps") {
    const DecoderConfig dc = toy_decoder();
    const TrainData data = toy_data(16, 3);
    TrainConfig cfg;
    auto p = param_init<double>(5, dc);
    auto st = OptState<double>::zeros_like(p);
    const Decoder<double> dec(dc);
    auto loss = [&] {
        DecoderCache<double> cache;
        const auto out = dec.forward(data.y_train, p, &cache);
        std::vector<Grid<double>> dout(out.size());
        double total = 0.0;
        for (std::size_t s = 0; s < out.size(); ++s) {
            total += mae_loss<double>(out[s], data.target_train[s].cast<double>(), &dout[s]);
            dout[s] /= double(out.size());
        }
        auto g = p.zeros_like();
        dec.backward(dout, cache, p, g);
        return std::pair{total / double(out.size()), g};
    };
    double prev = loss().first;
    for (int step = 0; step < 5; ++step) {
        auto [l, g] = loss();
        adamw_step(p, g, st, 1e-4, cfg);
        const double next = loss().first;
        CHECK(next < prev);
        prev = next;
    }
}

TEST_CASE("shuffling differs between seeds but stays finite") {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    const TrainData data = toy_data(24, 6);
    cfg.seed = 1;
    const auto a = train_decoder<float>(data, toy_decoder(), cfg);
    cfg.seed = 2;
    const auto b = train_decoder<float>(data, toy_decoder(), cfg);
    CHECK(a.last.l1.allFinite());
    CHECK(b.last.l1.allFinite());
    CHECK(a.last.l1 != b.last.l1);
}

TEST_CASE("mismatched data is rejected") {
    TrainData d = toy_data(4, 1);
    d.target_train.pop_back();
    CHECK_THROWS_AS(train_decoder<double>(d, toy_decoder(), TrainConfig{}), ConfigError);
}
