#include "invlint/transforms.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace invlint;

namespace {

constexpr double pi = std::numbers::pi;

ShotGather random_gather(std::uint64_t seed, int S, int T, int R) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    ShotGather g;
    g.dt = 1e-3;
    for (int s = 0; s < S; ++s) {
        Gridf tr(T, R);
        for (auto& v : tr.reshaped()) v = u(rng);
        g.traces.push_back(tr);
    }
    return g;
}

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

} // namespace

TEST_CASE("phi kernel values") {
    PhiSpec sp{PhiFamily::SinTMeanX, 8};
    CHECK(phi_value(sp, 3, 0.7, 0.0) == doctest::Approx(0.0));
    sp.family = PhiFamily::SinTCosX;
    CHECK(phi_value(sp, 1, 0.0, 0.5) == doctest::Approx(1.0));
    sp.family = PhiFamily::SinSumTX;
    CHECK(std::abs(phi_value(sp, 2, 0.25, 0.25)) < 1e-12);
    CHECK_THROWS_AS(phi_value(sp, 0, 0.1, 0.1), ConfigError);
    CHECK_THROWS_AS(phi_value(sp, 9, 0.1, 0.1), ConfigError);
}

TEST_CASE("psi kernel values") {
    PsiSpec sp{PsiFamily::Gaussian, 16};
    // m = 1 has its center at (1/8, 1/8); spacing 1/4
    CHECK(psi_value(sp, 1, 0.125, 0.125) == doctest::Approx(1.0));
    const double sigma = 0.25;
    CHECK(psi_value(sp, 1, 0.125 + sigma, 0.125) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    sp.family = PsiFamily::Sinc;
    CHECK(psi_value(sp, 1, 0.125, 0.125) == doctest::Approx(pi));
    CHECK(psi_value(sp, 1, 0.125 + 0.5, 0.125) == doctest::Approx(std::sin(pi * 0.5) / 0.5));
    sp.family = PsiFamily::SinSin;
    CHECK(psi_value(sp, 1, 0.5, 0.5) == doctest::Approx(1.0));
    CHECK_THROWS_AS(psi_value(sp, 17, 0.5, 0.5), ConfigError);
}

TEST_CASE("small-sigma gaussian is the gaussian with sigma / 3") {
    PsiSpec g{PsiFamily::Gaussian, 9};
    PsiSpec s{PsiFamily::GaussianSmallSigma, 9};
    const double sigma = 1.0 / 3.0;
    for (int m = 1; m <= 9; ++m)
        for (double x : {0.1, 0.4, 0.9})
            for (double z : {0.05, 0.5, 0.75}) {
                const double mx = ((m - 1) % 3 + 0.5) / 3.0, mz = ((m - 1) / 3 + 0.5) / 3.0;
                const double r2 = (x - mx) * (x - mx) + (z - mz) * (z - mz);
                CHECK(psi_value(s, m, x, z) == doctest::Approx(std::exp(-r2 / (2.0 * sigma * sigma / 9.0))));
                CHECK(psi_value(g, m, x, z) == doctest::Approx(std::exp(-r2 / (2.0 * sigma * sigma))));
            }
}

TEST_CASE("kernel name round trip and menus") {
    CHECK(phi_menu().size() == 6);
    CHECK(psi_menu().size() == 8);
    for (auto f : phi_menu()) CHECK(parse_phi_family(to_string(f)) == f);
    for (auto f : psi_menu()) CHECK(parse_psi_family(to_string(f)) == f);
    CHECK(parse_phi_family("identity_skip") == PhiFamily::IdentitySkip);
    CHECK_THROWS_AS(parse_phi_family("fourier"), ConfigError);
    CHECK_THROWS_AS(parse_psi_family("fourier"), ConfigError);
}

TEST_CASE("encode_measurement matches a triple loop for every family") {
    const int S = 3, T = 4, R = 5, N = 6;
    const ShotGather g = random_gather(11, S, T, R);
    for (auto f : phi_menu()) {
        CAPTURE(to_string(f));
        const PhiSpec sp{f, N};
        Eigen::VectorXd ref = Eigen::VectorXd::Zero(S * N);
        for (int s = 0; s < S; ++s)
            for (int n = 1; n <= N; ++n)
                for (int t = 0; t < T; ++t)
                    for (int r = 0; r < R; ++r)
                        ref(s * N + n - 1) += g.traces[s](t, r) * phi_value(sp, n, (r + 0.5) / R, (t + 0.5) / T) /
                                              (double(T) * R);
        CHECK(rel_err(encode_measurement(g, sp), ref) < 1e-6);
    }
}

TEST_CASE("encode_measurement on sin(pi t)") {
    const int T = 4000, R = 3;
    ShotGather g;
    Gridf tr(T, R);
    for (int t = 0; t < T; ++t) tr.row(t).setConstant(static_cast<float>(std::sin(pi * (t + 0.5) / T)));
    g.traces.push_back(tr);
    const Eigen::VectorXd u = encode_measurement(g, {PhiFamily::SinTMeanX, 5});
    CHECK(u(0) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(std::abs(u(2)) < 1e-5);
    CHECK(std::abs(u(4)) < 1e-5);
}

TEST_CASE("identity skip flattens the gather") {
    const ShotGather g = random_gather(3, 2, 3, 4);
    const Eigen::VectorXd u = encode_measurement(g, {PhiFamily::IdentitySkip, 1});
    REQUIRE(u.size() == 24);
    CHECK(u(12 + 1 * 4 + 2) == doctest::Approx(g.traces[1](1, 2)));
}

TEST_CASE("encoding is linear, source-ordered and prefix consistent") {
    const ShotGather a = random_gather(1, 2, 30, 7), b = random_gather(2, 2, 30, 7);
    ShotGather mix = a;
    for (int s = 0; s < 2; ++s) mix.traces[s] = 2.0f * a.traces[s] - 0.5f * b.traces[s];
    const PhiSpec sp{PhiFamily::SinTSinX, 12};
    const Eigen::VectorXd ua = encode_measurement(a, sp), ub = encode_measurement(b, sp);
    CHECK(rel_err(encode_measurement(mix, sp), 2.0 * ua - 0.5 * ub) < 1e-5);

    ShotGather swapped = a;
    std::swap(swapped.traces[0], swapped.traces[1]);
    const Eigen::VectorXd us = encode_measurement(swapped, sp);
    CHECK(us.head(12) == ua.tail(12));
    CHECK(us.tail(12) == ua.head(12));

    const Eigen::VectorXd longer = encode_measurement(a, {PhiFamily::SinTSinX, 20});
    CHECK(rel_err(longer.segment(0, 12), ua.head(12)) < 1e-12);
    CHECK(rel_err(longer.segment(20, 12), ua.tail(12)) < 1e-12);
    const ShotGather zero{{Gridf::Zero(30, 7), Gridf::Zero(30, 7)}, 1e-3};
    CHECK(encode_measurement(zero, sp).isZero());
}

TEST_CASE("embed_property matches a double loop") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Gridd y(8, 8);
    for (auto& v : y.reshaped()) v = u(rng);
    for (auto f : psi_menu()) {
        CAPTURE(to_string(f));
        const PsiSpec sp{f, 9};
        Eigen::VectorXd ref = Eigen::VectorXd::Zero(9);
        for (int m = 1; m <= 9; ++m)
            for (int z = 0; z < 8; ++z)
                for (int x = 0; x < 8; ++x) ref(m - 1) += y(z, x) * psi_value(sp, m, (x + 0.5) / 8, (z + 0.5) / 8) / 64.0;
        CHECK(rel_err(embed_property(y, sp), ref) < 1e-6);
    }
    CHECK(embed_property(Gridd::Zero(8, 8), PsiSpec{}).isZero());
}

TEST_CASE("constant map embeds to the kernel mass") {
    const PsiSpec sp{PsiFamily::Gaussian, 16};
    const Eigen::VectorXd y = embed_property(Gridd::Ones(12, 10), sp);
    for (int m = 1; m <= 16; ++m) {
        double mass = 0.0;
        for (int z = 0; z < 12; ++z)
            for (int x = 0; x < 10; ++x) mass += psi_value(sp, m, (x + 0.5) / 10, (z + 0.5) / 12);
        CHECK(y(m - 1) == doctest::Approx(mass / 120.0).epsilon(1e-12));
    }
}

TEST_CASE("embedding is linear and prefix consistent in M") {
    Gridd a = Gridd::Random(10, 10), b = Gridd::Random(10, 10);
    const PsiSpec sp{PsiFamily::SinCos, 7};
    CHECK(rel_err(embed_property(Gridd(3.0 * a + b), sp), 3.0 * embed_property(a, sp) + embed_property(b, sp)) < 1e-5);
    CHECK(rel_err(embed_property(a, PsiSpec{PsiFamily::SinCos, 11}).head(7), embed_property(a, sp)) < 1e-12);
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(PhiSpec({PhiFamily::SinTSinX, 0}).validate(), ConfigError);
    CHECK_THROWS_AS(PsiSpec({PsiFamily::Gaussian, 10}).validate(), ConfigError);  // not a square
    PsiSpec rect{PsiFamily::Gaussian, 12, 4, 3};
    CHECK_NOTHROW(rect.validate());
    CHECK(rect.base_sigma() == doctest::Approx(0.25));
}
