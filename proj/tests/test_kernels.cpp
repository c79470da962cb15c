#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rdd/kernels.hpp"
#include "rdd/numeric.hpp"

using namespace rdd;

namespace {

Tensor random_tensor(int c, int h, int w, Rng& rng) {
    Tensor t(c, h, w);
    for (double& v : t.data) v = rng.uniform(-2.0, 2.0);
    return t;
}

Matrix random_matrix(int r, int c, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.uniform(-2.0, 2.0);
    return m;
}

}  // namespace

TEST_CASE("pool_mean_width basics") {
    Tensor constant(3, 4, 5, 2.5);
    Matrix m = pool_mean_width(constant);
    for (double v : m.data) CHECK(v == doctest::Approx(2.5).epsilon(1e-15));

    Tensor row(1, 1, 4);
    row.data = {1, 2, 3, 6};
    CHECK(pool_mean_width(row).at(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("pool_mean_width matches naive double-loop oracle") {
    Rng rng(11);
    Tensor x = random_tensor(3, 5, 7, rng);
    Matrix got = pool_mean_width(x);
    for (int c = 0; c < 3; ++c)
        for (int h = 0; h < 5; ++h) {
            double s = 0.0;
            for (int j = 0; j < 7; ++j) s += x.at(c, h, j);
            CHECK(std::abs(got.at(c, h) - s / 7.0) < 1e-12);
        }
}

TEST_CASE("pool_mean_height basics and oracle") {
    Tensor constant(2, 3, 4, -1.25);
    for (double v : pool_mean_height(constant).data)
        CHECK(v == doctest::Approx(-1.25).epsilon(1e-15));

    Tensor col(1, 2, 1);
    col.data = {2, 4};
    CHECK(pool_mean_height(col).at(0, 0) == doctest::Approx(3.0).epsilon(1e-15));

    Rng rng(12);
    Tensor x = random_tensor(3, 5, 7, rng);
    Matrix got = pool_mean_height(x);
    for (int c = 0; c < 3; ++c)
        for (int w = 0; w < 7; ++w) {
            double s = 0.0;
            for (int i = 0; i < 5; ++i) s += x.at(c, i, w);
            CHECK(std::abs(got.at(c, w) - s / 5.0) < 1e-12);
        }
}

TEST_CASE("pool then mean equals global channel mean") {
    Rng rng(13);
    Tensor x = random_tensor(4, 6, 9, rng);
    Matrix zh = pool_mean_width(x);
    for (int c = 0; c < 4; ++c) {
        double via_pool = 0.0;
        for (int h = 0; h < 6; ++h) via_pool += zh.at(c, h);
        via_pool /= 6.0;
        double global = 0.0;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 9; ++j) global += x.at(c, i, j);
        global /= 54.0;
        CHECK(std::abs(via_pool - global) < 1e-12);
    }
}

TEST_CASE("conv1x1 identity, small case, oracle, shape error") {
    Rng rng(14);
    Matrix x = random_matrix(3, 5, rng);
    Matrix id(3, 3);
    for (int i = 0; i < 3; ++i) id.at(i, i) = 1.0;
    std::vector<double> zero_bias(3, 0.0);
    Matrix y = conv1x1(id, x, zero_bias);
    for (size_t i = 0; i < x.data.size(); ++i) CHECK(y.data[i] == x.data[i]);

    Matrix w(1, 2);
    w.data = {1, 1};
    Matrix v(2, 1);
    v.data = {3, 4};
    CHECK(conv1x1(w, v, std::vector<double>{0.0}).at(0, 0) == doctest::Approx(7.0));

    Matrix a = random_matrix(4, 8, rng);
    Matrix b = random_matrix(8, 10, rng);
    std::vector<double> bias(4);
    for (double& t : bias) t = rng.uniform(-1, 1);
    Matrix got = conv1x1(a, b, bias);
    Matrix want = oracle::naive_matmul_bias(a, b, bias);
    for (size_t i = 0; i < got.data.size(); ++i) CHECK(std::abs(got.data[i] - want.data[i]) < 1e-12);

    Matrix bad = random_matrix(5, 10, rng);
    CHECK_THROWS_AS(conv1x1(a, bad, {}), ShapeError);
}

TEST_CASE("conv1x1 linearity") {
    Rng rng(15);
    Matrix w = random_matrix(3, 6, rng);
    Matrix x = random_matrix(6, 7, rng);
    Matrix y = random_matrix(6, 7, rng);
    const double a = 1.7, b = -0.4;
    Matrix combo(6, 7);
    for (size_t i = 0; i < combo.data.size(); ++i) combo.data[i] = a * x.data[i] + b * y.data[i];
    Matrix lhs = conv1x1(w, combo, {});
    Matrix rx = conv1x1(w, x, {});
    Matrix ry = conv1x1(w, y, {});
    for (size_t i = 0; i < lhs.data.size(); ++i)
        CHECK(std::abs(lhs.data[i] - (a * rx.data[i] + b * ry.data[i])) < 1e-10);
}

TEST_CASE("activations") {
    CHECK(activate(Activation::Sigmoid, 0.0) == doctest::Approx(0.5));
    CHECK(activate(Activation::HardSwish, 0.0) == doctest::Approx(0.0));
    CHECK(activate(Activation::HardSwish, 3.0) == doctest::Approx(3.0));
    CHECK(activate(Activation::HardSwish, -3.0) == doctest::Approx(0.0));

    // strict range and monotonicity on a grid including large magnitudes
    double prev = activate(Activation::Sigmoid, -20.0);
    CHECK(prev > 0.0);
    for (int k = 1; k < 1000; ++k) {
        const double t = -20.0 + 40.0 * k / 999.0;
        const double s = activate(Activation::Sigmoid, t);
        CHECK(s > 0.0);
        CHECK(s < 1.0);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("activation gradients vs finite differences") {
    Rng rng(16);
    for (Activation kind : {Activation::Sigmoid, Activation::HardSwish}) {
        for (int k = 0; k < 10; ++k) {
            const double t = rng.uniform(-2.9, 2.9);
            std::vector<double> point = {t};
            std::vector<double> grad = {activate_grad(kind, t)};
            auto f = [kind](std::span<const double> p) { return activate(kind, p[0]); };
            auto rep = grad_check(f, grad, point, 1e-5, 1e-4);
            CHECK(rep.pass);
        }
    }
}

TEST_CASE("grad_check on a quadratic") {
    std::vector<double> point = {1.0, 2.0};
    std::vector<double> grad = {2.0, 4.0};
    auto f = [](std::span<const double> p) {
        double s = 0.0;
        for (double v : p) s += v * v;
        return s;
    };
    auto rep = grad_check(f, grad, point, 1e-5, 1e-4);
    CHECK(rep.pass);
    CHECK(rep.max_rel_err < 1e-8);
    CHECK(rep.n_probes == 2);
}

TEST_CASE("grad_check on sigmoid of a dot product") {
    Rng rng(17);
    std::vector<double> a(8), point(8);
    for (int i = 0; i < 8; ++i) {
        a[i] = rng.uniform(-1, 1);
        point[i] = rng.uniform(-1, 1);
    }
    auto f = [&a](std::span<const double> p) {
        double d = 0.0;
        for (size_t i = 0; i < p.size(); ++i) d += a[i] * p[i];
        return activate(Activation::Sigmoid, d);
    };
    double d = 0.0;
    for (int i = 0; i < 8; ++i) d += a[i] * point[i];
    const double sg = activate_grad(Activation::Sigmoid, d);
    std::vector<double> grad(8);
    for (int i = 0; i < 8; ++i) grad[i] = sg * a[i];
    CHECK(grad_check(f, grad, point, 1e-5, 1e-4).pass);

    // negative control: gradient off by 2x must fail
    for (double& g : grad) g *= 2.0;
    CHECK_FALSE(grad_check(f, grad, point, 1e-5, 1e-4).pass);
}

TEST_CASE("grad_check flags non-finite f") {
    std::vector<double> point = {0.0};
    std::vector<double> grad = {1.0};
    auto f = [](std::span<const double> p) { return std::log(p[0]); };
    auto rep = grad_check(f, grad, point, 1e-5, 1e-4);
    CHECK_FALSE(rep.pass);
    CHECK(!rep.note.empty());
}

TEST_CASE("scalar and avx2 kernels agree") {
    const auto& sc = kernels::scalar();
    const kernels::Ops* vec = kernels::avx2();
    if (!vec) {
        MESSAGE("AVX2 unavailable on this host; dispatch falls back to scalar");
        CHECK(std::string(kernels::active().name) == "scalar");
        return;
    }

    Rng rng(18);
    for (int trial = 0; trial < 20; ++trial) {
        const int C = 1 + static_cast<int>(rng.bounded(5));
        const int H = 1 + static_cast<int>(rng.bounded(9));
        const int W = 1 + static_cast<int>(rng.bounded(13));
        Tensor x = random_tensor(C, H, W, rng);

        std::vector<double> a(static_cast<size_t>(C) * H), b(a.size());
        sc.pool_mean_width(x.data.data(), C, H, W, a.data());
        vec->pool_mean_width(x.data.data(), C, H, W, b.data());
        for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-13);

        std::vector<double> c(static_cast<size_t>(C) * W), d(c.size());
        sc.pool_mean_height(x.data.data(), C, H, W, c.data());
        vec->pool_mean_height(x.data.data(), C, H, W, d.data());
        for (size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c[i] - d[i]) < 1e-13);

        Matrix w = random_matrix(C, C, rng);
        Matrix xm = random_matrix(C, W, rng);
        std::vector<double> bias(C);
        for (double& v : bias) v = rng.uniform(-1, 1);
        Matrix o1(C, W), o2(C, W);
        sc.matmul_bias(w.data.data(), xm.data.data(), bias.data(), C, C, W, o1.data.data());
        vec->matmul_bias(w.data.data(), xm.data.data(), bias.data(), C, C, W, o2.data.data());
        for (size_t i = 0; i < o1.data.size(); ++i) CHECK(std::abs(o1.data[i] - o2.data[i]) < 1e-12);

        std::vector<double> gh(static_cast<size_t>(C) * H), gw(static_cast<size_t>(C) * W);
        for (double& v : gh) v = rng.uniform(0, 1);
        for (double& v : gw) v = rng.uniform(0, 1);
        Tensor y1(C, H, W), y2(C, H, W);
        sc.gate_mul(x.data.data(), gh.data(), gw.data(), C, H, W, y1.data.data());
        vec->gate_mul(x.data.data(), gh.data(), gw.data(), C, H, W, y2.data.data());
        for (size_t i = 0; i < y1.data.size(); ++i)
            CHECK(std::abs(y1.data[i] - y2.data[i]) < 1e-13);

        std::vector<double> v1(x.data), v2(x.data), src(x.data.size());
        for (double& v : src) v = rng.uniform(-1, 1);
        sc.axpy(0.7, src.data(), v1.data(), src.size());
        vec->axpy(0.7, src.data(), v2.data(), src.size());
        for (size_t i = 0; i < v1.size(); ++i) CHECK(std::abs(v1[i] - v2[i]) < 1e-13);
    }
}

TEST_CASE("primitive outputs stay finite on finite inputs") {
    Rng rng(19);
    Tensor x = random_tensor(2, 3, 4, rng);
    for (double v : pool_mean_width(x).data) CHECK(std::isfinite(v));
    for (double v : pool_mean_height(x).data) CHECK(std::isfinite(v));
    for (double t : {-700.0, -1.0, 0.0, 1.0, 700.0}) {
        CHECK(std::isfinite(activate(Activation::Sigmoid, t)));
        CHECK(std::isfinite(activate(Activation::HardSwish, t)));
    }
}
