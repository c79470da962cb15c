#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "oracles.hpp"
#include "rdd/coord_attention.hpp"

using namespace rdd;
using namespace rdd::ca;

namespace {

Tensor random_tensor(int c, int h, int w, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(c, h, w);
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("mid_channels clamps to at least one") {
    CHECK(mid_channels(64, 32) == 2);
    CHECK(mid_channels(64, 16) == 4);
    CHECK(mid_channels(8, 32) == 1);
    CHECK(mid_channels(1, 32) == 1);
    CHECK(mid_channels(33, 32) == 1);
}

TEST_CASE("init_params shapes, determinism, bounds") {
    CAParams p = init_params(16, 4, 42);
    CHECK(p.c_in == 16);
    CHECK(p.c_mid == 4);
    CHECK(p.w_f1.rows == 4);
    CHECK(p.w_f1.cols == 16);
    CHECK(p.w_fh.rows == 16);
    CHECK(p.w_fh.cols == 4);
    CHECK(p.w_fw.rows == 16);
    CHECK(p.w_fw.cols == 4);
    CHECK(p.b_f1.size() == 4);
    CHECK(p.b_fh.size() == 16);
    CHECK(p.b_fw.size() == 16);
    for (double b : p.b_f1) CHECK(b == 0.0);
    for (double b : p.b_fh) CHECK(b == 0.0);
    for (double b : p.b_fw) CHECK(b == 0.0);
    const double k1 = std::sqrt(1.0 / 16.0), k2 = std::sqrt(1.0 / 4.0);
    for (double w : p.w_f1.data) CHECK(std::abs(w) <= k1);
    for (double w : p.w_fh.data) CHECK(std::abs(w) <= k2);

    CAParams q = init_params(16, 4, 42);
    CHECK(p.w_f1.data == q.w_f1.data);
    CHECK(p.w_fh.data == q.w_fh.data);
    CHECK(p.w_fw.data == q.w_fw.data);

    CAParams r = init_params(16, 4, 43);
    CHECK(p.w_f1.data != r.w_f1.data);
}

TEST_CASE("forward output dimensions") {
    CAParams p = init_params(8, 2, 7);
    Rng rng(1);
    Tensor x = random_tensor(8, 4, 6, rng);
    CAOutput out = forward(x, p);
    CHECK(out.y.channels == 8);
    CHECK(out.y.height == 4);
    CHECK(out.y.width == 6);
    CHECK(out.g_h.rows == 8);
    CHECK(out.g_h.cols == 4);
    CHECK(out.g_w.rows == 8);
    CHECK(out.g_w.cols == 6);
    CHECK(out.f.rows == 4);       // c_mid = 8/2
    CHECK(out.f.cols == 10);      // H + W
    for (double g : out.g_h.data) {
        CHECK(g > 0.0);
        CHECK(g < 1.0);
    }
    for (double g : out.g_w.data) {
        CHECK(g > 0.0);
        CHECK(g < 1.0);
    }
}

TEST_CASE("zero input yields gates of exactly one half and zero output") {
    // zero pooled features through zero biases give zero pre-activations,
    // and sigmoid(0) = 1/2
    CAParams p = init_params(6, 3, 5);
    Tensor x(6, 3, 4, 0.0);
    CAOutput out = forward(x, p);
    for (double g : out.g_h.data) CHECK(g == doctest::Approx(0.5).epsilon(1e-15));
    for (double g : out.g_w.data) CHECK(g == doctest::Approx(0.5).epsilon(1e-15));
    for (double y : out.y.data) CHECK(y == 0.0);
}

TEST_CASE("forward matches the straight-line loop oracle") {
    Rng rng(2);
    for (uint64_t seed : {10ull, 11ull, 12ull}) {
        for (Activation delta : {Activation::HardSwish, Activation::Sigmoid}) {
            const int C = 2 + static_cast<int>(rng.bounded(10));
            const int H = 1 + static_cast<int>(rng.bounded(8));
            const int W = 1 + static_cast<int>(rng.bounded(8));
            CAParams p = init_params(C, 4, seed, delta);
            Tensor x = random_tensor(C, H, W, rng, -2.0, 2.0);
            CAOutput got = forward(x, p);
            Tensor want = oracle::ca_forward_loops(x, p);
            CHECK(max_abs_diff(got.y.data, want.data) < 1e-10);
        }
    }
}

TEST_CASE("output recomposes from input and attention maps") {
    Rng rng(3);
    CAParams p = init_params(5, 2, 99);
    Tensor x = random_tensor(5, 3, 7, rng);
    CAOutput out = forward(x, p);
    auto [gh, gw] = attention_maps(out);
    for (int c = 0; c < 5; ++c)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 7; ++j)
                CHECK(std::abs(out.y.at(c, i, j) - x.at(c, i, j) * gh->at(c, i) * gw->at(c, j)) <
                      1e-12);
}

TEST_CASE("attention is a contraction: |y| <= |x| elementwise") {
    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        const int C = 1 + static_cast<int>(rng.bounded(16));
        const int H = 1 + static_cast<int>(rng.bounded(16));
        const int W = 1 + static_cast<int>(rng.bounded(16));
        CAParams p = init_params(C, 8, 50 + trial);
        Tensor x = random_tensor(C, H, W, rng, -3.0, 3.0);
        CAOutput out = forward(x, p);
        CHECK(out.y.same_dims(x));
        for (size_t i = 0; i < x.data.size(); ++i)
            CHECK(std::abs(out.y.data[i]) <= std::abs(x.data[i]));
    }
}

TEST_CASE("row and column gates factorize across permutations") {
    // permuting columns of the input permutes g_w the same way and leaves
    // g_h unchanged, and vice versa
    Rng rng(5);
    CAParams p = init_params(6, 2, 77);
    const int H = 4, W = 5;
    Tensor x = random_tensor(6, H, W, rng);

    std::vector<int> col_perm = {3, 0, 4, 1, 2};
    Tensor xp(6, H, W);
    for (int c = 0; c < 6; ++c)
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j) xp.at(c, i, j) = x.at(c, i, col_perm[j]);

    CAOutput a = forward(x, p);
    CAOutput b = forward(xp, p);
    for (int c = 0; c < 6; ++c) {
        for (int i = 0; i < H; ++i)
            CHECK(std::abs(a.g_h.at(c, i) - b.g_h.at(c, i)) < 1e-12);
        for (int j = 0; j < W; ++j)
            CHECK(std::abs(a.g_w.at(c, col_perm[j]) - b.g_w.at(c, j)) < 1e-12);
    }

    std::vector<int> row_perm = {2, 3, 0, 1};
    Tensor xr(6, H, W);
    for (int c = 0; c < 6; ++c)
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j) xr.at(c, i, j) = x.at(c, row_perm[i], j);
    CAOutput r = forward(xr, p);
    for (int c = 0; c < 6; ++c) {
        for (int j = 0; j < W; ++j)
            CHECK(std::abs(a.g_w.at(c, j) - r.g_w.at(c, j)) < 1e-12);
        for (int i = 0; i < H; ++i)
            CHECK(std::abs(a.g_h.at(c, row_perm[i]) - r.g_h.at(c, i)) < 1e-12);
    }
}

TEST_CASE("backward: zero upstream gives zero gradients") {
    Rng rng(6);
    CAParams p = init_params(4, 2, 8);
    Tensor x = random_tensor(4, 3, 3, rng);
    Tensor up(4, 3, 3, 0.0);
    CAGradients g = backward(x, p, up);
    for (double v : g.grad_x.data) CHECK(v == 0.0);
    for (double v : flatten_grads(g)) {
        // flatten_grads excludes grad_x
        CHECK(v == 0.0);
    }
}

TEST_CASE("backward input gradient passes a central-difference check") {
    Rng rng(7);
    for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        const int C = 2 + static_cast<int>(rng.bounded(4));
        const int H = 2 + static_cast<int>(rng.bounded(3));
        const int W = 2 + static_cast<int>(rng.bounded(3));
        CAParams p = init_params(C, 2, seed);
        Tensor x = random_tensor(C, H, W, rng);
        Tensor up = random_tensor(C, H, W, rng);

        CAGradients g = backward(x, p, up);
        auto f = [&](std::span<const double> flat) {
            Tensor xt = x;
            std::copy(flat.begin(), flat.end(), xt.data.begin());
            CAOutput out = forward(xt, p);
            double s = 0.0;
            for (size_t i = 0; i < out.y.data.size(); ++i) s += up.data[i] * out.y.data[i];
            return s;
        };
        auto rep = grad_check(f, g.grad_x.data, x.data, 1e-5, 1e-4);
        INFO("seed ", seed, " max_rel_err ", rep.max_rel_err);
        CHECK(rep.pass);
    }
}

TEST_CASE("backward parameter gradients pass a central-difference check") {
    Rng rng(8);
    for (uint64_t seed : {21ull, 22ull, 23ull, 24ull, 25ull}) {
        const int C = 2 + static_cast<int>(rng.bounded(4));
        const int H = 2 + static_cast<int>(rng.bounded(3));
        const int W = 2 + static_cast<int>(rng.bounded(3));
        const Activation delta = seed % 2 ? Activation::HardSwish : Activation::Sigmoid;
        CAParams p = init_params(C, 2, seed, delta);
        Tensor x = random_tensor(C, H, W, rng);
        Tensor up = random_tensor(C, H, W, rng);

        CAGradients g = backward(x, p, up);
        std::vector<double> theta = flatten(p);
        auto f = [&](std::span<const double> flat) {
            CAParams pt = p;
            unflatten(pt, flat);
            CAOutput out = forward(x, pt);
            double s = 0.0;
            for (size_t i = 0; i < out.y.data.size(); ++i) s += up.data[i] * out.y.data[i];
            return s;
        };
        auto rep = grad_check(f, flatten_grads(g), theta, 1e-5, 1e-4);
        INFO("seed ", seed, " max_rel_err ", rep.max_rel_err, " note ", rep.note);
        CHECK(rep.pass);
    }
}

TEST_CASE("backward closed-form check on a one-pixel block") {
    // C=H=W=1: y = x * sigmoid(w_fh*f + b_fh) * sigmoid(w_fw*f' + b_fw)
    // with f = delta(w1*x + b1) since pooling of a single pixel is identity.
    CAParams p = init_params(1, 1, 3, Activation::Sigmoid);
    p.w_f1.data = {0.7};
    p.b_f1 = {0.1};
    p.w_fh.data = {-0.5};
    p.b_fh = {0.2};
    p.w_fw.data = {0.9};
    p.b_fw = {-0.3};

    const double xv = 0.8;
    auto sig = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
    const double f = sig(0.7 * xv + 0.1);
    const double gh = sig(-0.5 * f + 0.2);
    const double gw = sig(0.9 * f + (-0.3));

    Tensor x(1, 1, 1);
    x.data = {xv};
    CAOutput out = forward(x, p);
    CHECK(out.y.data[0] == doctest::Approx(xv * gh * gw).epsilon(1e-12));

    Tensor up(1, 1, 1, 1.0);
    CAGradients g = backward(x, p, up);
    const double df_dx = f * (1 - f) * 0.7;
    const double dgh_dx = gh * (1 - gh) * (-0.5) * df_dx;
    const double dgw_dx = gw * (1 - gw) * 0.9 * df_dx;
    const double expect = gh * gw + xv * dgh_dx * gw + xv * gh * dgw_dx;
    CHECK(g.grad_x.data[0] == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("shape preservation across random dimensions") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const int C = 1 + static_cast<int>(rng.bounded(16));
        const int H = 1 + static_cast<int>(rng.bounded(16));
        const int W = 1 + static_cast<int>(rng.bounded(16));
        CAParams p = init_params(C, 32, 1000 + trial);
        Tensor x = random_tensor(C, H, W, rng);
        CAOutput out = forward(x, p);
        REQUIRE(out.y.same_dims(x));
        REQUIRE(out.f.rows == mid_channels(C, 32));
        REQUIRE(out.f.cols == H + W);
    }
}

TEST_CASE("parameter serialization round-trips bit-exactly") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "rdd_capm_roundtrip.bin";
    for (Activation delta : {Activation::HardSwish, Activation::Sigmoid}) {
        CAParams p = init_params(12, 3, 314, delta);
        save_params(p, path);
        CAParams q = load_params(path);
        CHECK(q.c_in == p.c_in);
        CHECK(q.reduction == p.reduction);
        CHECK(q.c_mid == p.c_mid);
        CHECK(q.delta_kind == p.delta_kind);
        CHECK(q.w_f1.data == p.w_f1.data);
        CHECK(q.b_f1 == p.b_f1);
        CHECK(q.w_fh.data == p.w_fh.data);
        CHECK(q.b_fh == p.b_fh);
        CHECK(q.w_fw.data == p.w_fw.data);
        CHECK(q.b_fw == p.b_fw);

        CAOutput a = forward(Tensor(12, 3, 4, 0.25), p);
        CAOutput b = forward(Tensor(12, 3, 4, 0.25), q);
        CHECK(a.y.data == b.y.data);
    }
    fs::remove(path);
}

TEST_CASE("load_params rejects corrupt files") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "rdd_capm_bad.bin";
    {
        FILE* fp = std::fopen(path.c_str(), "wb");
        REQUIRE(fp);
        std::fputs("NOPE", fp);
        std::fclose(fp);
    }
    CHECK_THROWS(load_params(path));
    fs::remove(path);
}
