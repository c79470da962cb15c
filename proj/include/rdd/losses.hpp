#pragma once

#include <span>
#include <vector>

namespace rdd::losses {

struct ClassTarget {
    int n_classes = 0;
    int target_index = 0;
    double epsilon = 0.0;  // in [0, 1)
};

struct LossValue {
    double value = 0.0;
    std::vector<double> grad_wrt_predictions;
};

// Predictions are clamped to [kClamp, 1-kClamp] before logs.
inline constexpr double kClamp = 1e-7;

/// On-class 1-eps+eps/C, off-class eps/C. eps=0 gives the one-hot hard label.
std::vector<double> smooth_labels(const ClassTarget& t);

/// Per-class binary cross-entropy, summed over classes, with analytic gradient.
LossValue bce_loss(std::span<const double> y, std::span<const double> y_hat);

/// bce_loss against the smoothed target.
LossValue smoothed_classification_loss(const ClassTarget& t, std::span<const double> y_hat);

}  // namespace rdd::losses
