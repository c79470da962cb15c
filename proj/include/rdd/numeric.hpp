#pragma once

#include <functional>
#include <random>
#include <span>
#include <string>

#include "rdd/tensor.hpp"

namespace rdd {

// ---------------------------------------------------------------------------
// Tensor primitives

/// Per-channel mean over the width axis; result is C x H.
Matrix pool_mean_width(const Tensor& x);

/// Per-channel mean over the height axis; result is C x W.
Matrix pool_mean_height(const Tensor& x);

/// Channel-mixing matrix product: w (Cout x Cin) * x (Cin x N) + bias.
/// A 1x1 convolution over channels is exactly this per spatial position.
Matrix conv1x1(const Matrix& w, const Matrix& x, std::span<const double> bias);

// ---------------------------------------------------------------------------
// Activations

enum class Activation { HardSwish, Sigmoid };

double activate(Activation kind, double t);
double activate_grad(Activation kind, double t);

void activate_inplace(Activation kind, std::span<double> v);

Activation activation_from_string(const std::string& s);
std::string to_string(Activation kind);

// ---------------------------------------------------------------------------
// Gradient checking

struct GradCheckReport {
    double max_abs_err = 0.0;
    double max_rel_err = 0.0;
    int n_probes = 0;
    bool pass = false;
    std::string note;
};

using ScalarFn = std::function<double(std::span<const double>)>;

/// Compares an analytic gradient against central finite differences of f at
/// `point`. Relative error denominator is max(1, |analytic|, |numeric|).
/// Non-finite f at any probe point fails the check with a diagnostic note.
GradCheckReport grad_check(const ScalarFn& f, std::span<const double> analytic_grad,
                           std::span<const double> point, double eps, double tol);

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// mt19937_64 with explicit bit-to-double conversion so streams are identical
// across platforms and standard libraries.

class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), n >= 1. Rejection-free modulo is fine here;
    /// the bias at 64 bits is far below anything observable.
    uint64_t bounded(uint64_t n) { return gen_() % n; }

    /// Standard normal via Box-Muller.
    double normal();

    /// Beta(a, b) via two gamma draws (Marsaglia-Tsang).
    double beta(double a, double b);

private:
    double gamma(double shape);
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rdd
