#pragma once

#include <cstddef>
#include <string>

// Arithmetic inner loops behind the tensor ops. Every kernel exists as a
// portable scalar reference; an AVX2 variant is selected at runtime when the
// CPU supports it. The two must agree to tight tolerance (see kernel tests).

namespace rdd::kernels {

struct Ops {
    // out[c*H + h] = mean over j of x[c][h][j]
    void (*pool_mean_width)(const double* x, int C, int H, int W, double* out);
    // out[c*W + w] = mean over i of x[c][i][w]
    void (*pool_mean_height)(const double* x, int C, int H, int W, double* out);
    // out = w (m x k) * x (k x n) + bias (m), bias broadcast over columns; bias may be null
    void (*matmul_bias)(const double* w, const double* x, const double* bias,
                        int m, int k, int n, double* out);
    // y[c][i][j] = x[c][i][j] * gh[c*H + i] * gw[c*W + j]
    void (*gate_mul)(const double* x, const double* gh, const double* gw,
                     int C, int H, int W, double* y);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, size_t n);

    const char* name;
};

const Ops& scalar();

// AVX2 variant, or nullptr when not compiled in / not supported by this CPU.
const Ops* avx2();

bool avx2_supported();

// Runtime-selected implementation. Honors the RDD_FORCE_SCALAR env var.
const Ops& active();

}  // namespace rdd::kernels
