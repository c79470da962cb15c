#include "rdd/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdd/tensor.hpp"

namespace rdd::losses {

std::vector<double> smooth_labels(const ClassTarget& t) {
    if (t.n_classes < 1) throw std::invalid_argument("smooth_labels: need at least one class");
    if (t.target_index < 0 || t.target_index >= t.n_classes)
        throw std::out_of_range("smooth_labels: class index " + std::to_string(t.target_index) +
                                " out of range [0," + std::to_string(t.n_classes) + ")");
    if (t.epsilon < 0.0 || t.epsilon >= 1.0)
        throw std::invalid_argument("smooth_labels: epsilon must be in [0,1)");
    std::vector<double> y(t.n_classes, t.epsilon / t.n_classes);
    y[t.target_index] = 1.0 - t.epsilon + t.epsilon / t.n_classes;
    return y;
}

LossValue bce_loss(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size())
        throw ShapeError("bce_loss: target length " + std::to_string(y.size()) +
                         " != prediction length " + std::to_string(y_hat.size()));
    LossValue out;
    out.grad_wrt_predictions.resize(y.size());
    for (size_t c = 0; c < y.size(); ++c) {
        const bool clamped = y_hat[c] < kClamp || y_hat[c] > 1.0 - kClamp;
        const double p = std::clamp(y_hat[c], kClamp, 1.0 - kClamp);
        out.value += -y[c] * std::log(p) - (1.0 - y[c]) * std::log(1.0 - p);
        out.grad_wrt_predictions[c] = clamped ? 0.0 : (p - y[c]) / (p * (1.0 - p));
    }
    return out;
}

LossValue smoothed_classification_loss(const ClassTarget& t, std::span<const double> y_hat) {
    return bce_loss(smooth_labels(t), y_hat);
}

}  // namespace rdd::losses
