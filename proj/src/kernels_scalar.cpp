#include "rdd/kernels.hpp"

namespace rdd::kernels {
namespace {

void pool_mean_width_scalar(const double* x, int C, int H, int W, double* out) {
    for (int c = 0; c < C; ++c) {
        for (int h = 0; h < H; ++h) {
            const double* row = x + (static_cast<size_t>(c) * H + h) * W;
            double s = 0.0;
            for (int j = 0; j < W; ++j) s += row[j];
            out[static_cast<size_t>(c) * H + h] = s / W;
        }
    }
}

void pool_mean_height_scalar(const double* x, int C, int H, int W, double* out) {
    for (int c = 0; c < C; ++c) {
        double* o = out + static_cast<size_t>(c) * W;
        for (int w = 0; w < W; ++w) o[w] = 0.0;
        for (int i = 0; i < H; ++i) {
            const double* row = x + (static_cast<size_t>(c) * H + i) * W;
            for (int w = 0; w < W; ++w) o[w] += row[w];
        }
        for (int w = 0; w < W; ++w) o[w] /= H;
    }
}

void matmul_bias_scalar(const double* w, const double* x, const double* bias,
                        int m, int k, int n, double* out) {
    for (int i = 0; i < m; ++i) {
        double* o = out + static_cast<size_t>(i) * n;
        const double b = bias ? bias[i] : 0.0;
        for (int j = 0; j < n; ++j) o[j] = b;
        const double* wr = w + static_cast<size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double wv = wr[p];
            const double* xr = x + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) o[j] += wv * xr[j];
        }
    }
}

void gate_mul_scalar(const double* x, const double* gh, const double* gw,
                     int C, int H, int W, double* y) {
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < H; ++i) {
            const double g = gh[static_cast<size_t>(c) * H + i];
            const double* xr = x + (static_cast<size_t>(c) * H + i) * W;
            double* yr = y + (static_cast<size_t>(c) * H + i) * W;
            const double* gwr = gw + static_cast<size_t>(c) * W;
            for (int j = 0; j < W; ++j) yr[j] = xr[j] * g * gwr[j];
        }
    }
}

void axpy_scalar(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const Ops& scalar() {
    static const Ops ops{pool_mean_width_scalar, pool_mean_height_scalar,
                         matmul_bias_scalar,     gate_mul_scalar,
                         axpy_scalar,            "scalar"};
    return ops;
}

}  // namespace rdd::kernels
