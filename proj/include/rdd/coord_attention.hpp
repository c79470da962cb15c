#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rdd/numeric.hpp"
#include "rdd/tensor.hpp"

namespace rdd::ca {

/// Parameters of one coordinate-attention block. Immutable after init.
struct CAParams {
    int c_in = 0;
    int reduction = 32;
    int c_mid = 0;  // max(1, c_in / reduction)
    Matrix w_f1;    // c_mid x c_in
    std::vector<double> b_f1;
    Matrix w_fh;    // c_in x c_mid
    std::vector<double> b_fh;
    Matrix w_fw;    // c_in x c_mid
    std::vector<double> b_fw;
    Activation delta_kind = Activation::HardSwish;
};

struct CAOutput {
    Tensor y;     // same dims as input
    Matrix g_h;   // C x H, row gates in (0,1)
    Matrix g_w;   // C x W, column gates in (0,1)
    Matrix f;     // c_mid x (H+W), H block first
};

/// Gradients mirroring CAParams plus the input gradient.
struct CAGradients {
    Tensor grad_x;
    Matrix grad_w_f1;
    std::vector<double> grad_b_f1;
    Matrix grad_w_fh;
    std::vector<double> grad_b_fh;
    Matrix grad_w_fw;
    std::vector<double> grad_b_fw;
};

int mid_channels(int c_in, int reduction);

/// Uniform [-k, k] weights with k = sqrt(1/fan_in), zero biases.
/// Bitwise-deterministic for a given seed.
CAParams init_params(int c_in, int reduction, uint64_t seed,
                     Activation delta_kind = Activation::HardSwish);

CAOutput forward(const Tensor& x, const CAParams& p);

/// Reverse accumulation of d(sum upstream .* y) through forward.
CAGradients backward(const Tensor& x, const CAParams& p, const Tensor& upstream);

/// The two direction-wise gates, for inspection/export.
std::pair<const Matrix*, const Matrix*> attention_maps(const CAOutput& out);

// Flat binary serialization: "CAPM" magic, version, C, r, delta code, then
// w_f1, b_f1, w_fh, b_fh, w_fw, b_fw as little-endian f64.
void save_params(const CAParams& p, const std::filesystem::path& path);
CAParams load_params(const std::filesystem::path& path);

// Flatten/restore all parameters, declared order. Used by gradient checks.
std::vector<double> flatten(const CAParams& p);
void unflatten(CAParams& p, std::span<const double> flat);
std::vector<double> flatten_grads(const CAGradients& g);

}  // namespace rdd::ca
