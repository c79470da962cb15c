#include "rdd/kernels.hpp"

#ifdef RDD_HAVE_AVX2

#include <immintrin.h>

namespace rdd::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void pool_mean_width_avx2(const double* x, int C, int H, int W, double* out) {
    for (int c = 0; c < C; ++c) {
        for (int h = 0; h < H; ++h) {
            const double* row = x + (static_cast<size_t>(c) * H + h) * W;
            __m256d acc = _mm256_setzero_pd();
            int j = 0;
            for (; j + 4 <= W; j += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(row + j));
            double s = hsum(acc);
            for (; j < W; ++j) s += row[j];
            out[static_cast<size_t>(c) * H + h] = s / W;
        }
    }
}

void pool_mean_height_avx2(const double* x, int C, int H, int W, double* out) {
    for (int c = 0; c < C; ++c) {
        double* o = out + static_cast<size_t>(c) * W;
        int w = 0;
        for (; w + 4 <= W; w += 4) _mm256_storeu_pd(o + w, _mm256_setzero_pd());
        for (; w < W; ++w) o[w] = 0.0;
        for (int i = 0; i < H; ++i) {
            const double* row = x + (static_cast<size_t>(c) * H + i) * W;
            w = 0;
            for (; w + 4 <= W; w += 4) {
                __m256d acc = _mm256_add_pd(_mm256_loadu_pd(o + w), _mm256_loadu_pd(row + w));
                _mm256_storeu_pd(o + w, acc);
            }
            for (; w < W; ++w) o[w] += row[w];
        }
        const __m256d inv = _mm256_set1_pd(1.0 / H);
        w = 0;
        for (; w + 4 <= W; w += 4) _mm256_storeu_pd(o + w, _mm256_mul_pd(_mm256_loadu_pd(o + w), inv));
        for (; w < W; ++w) o[w] /= H;
    }
}

void matmul_bias_avx2(const double* w, const double* x, const double* bias,
                      int m, int k, int n, double* out) {
    for (int i = 0; i < m; ++i) {
        double* o = out + static_cast<size_t>(i) * n;
        const __m256d bv = _mm256_set1_pd(bias ? bias[i] : 0.0);
        int j = 0;
        for (; j + 4 <= n; j += 4) _mm256_storeu_pd(o + j, bv);
        for (; j < n; ++j) o[j] = bias ? bias[i] : 0.0;
        const double* wr = w + static_cast<size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const __m256d wv = _mm256_set1_pd(wr[p]);
            const double* xr = x + static_cast<size_t>(p) * n;
            j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d acc = _mm256_fmadd_pd(wv, _mm256_loadu_pd(xr + j), _mm256_loadu_pd(o + j));
                _mm256_storeu_pd(o + j, acc);
            }
            for (; j < n; ++j) o[j] += wr[p] * xr[j];
        }
    }
}

void gate_mul_avx2(const double* x, const double* gh, const double* gw,
                   int C, int H, int W, double* y) {
    for (int c = 0; c < C; ++c) {
        const double* gwr = gw + static_cast<size_t>(c) * W;
        for (int i = 0; i < H; ++i) {
            const __m256d g = _mm256_set1_pd(gh[static_cast<size_t>(c) * H + i]);
            const double* xr = x + (static_cast<size_t>(c) * H + i) * W;
            double* yr = y + (static_cast<size_t>(c) * H + i) * W;
            int j = 0;
            for (; j + 4 <= W; j += 4) {
                __m256d v = _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(xr + j), g),
                                          _mm256_loadu_pd(gwr + j));
                _mm256_storeu_pd(yr + j, v);
            }
            for (; j < W; ++j) yr[j] = xr[j] * gh[static_cast<size_t>(c) * H + i] * gwr[j];
        }
    }
}

void axpy_avx2(double a, const double* x, double* y, size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const Ops* avx2_impl() {
    static const Ops ops{pool_mean_width_avx2, pool_mean_height_avx2,
                         matmul_bias_avx2,     gate_mul_avx2,
                         axpy_avx2,            "avx2"};
    return &ops;
}

}  // namespace rdd::kernels

#else

namespace rdd::kernels {
const Ops* avx2_impl() { return nullptr; }
}  // namespace rdd::kernels

#endif
