#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace rdd {

/// The four damage classes, D00..D40, indexed 0..3.
enum class DamageClass : int { D00 = 0, D10 = 1, D20 = 2, D40 = 3 };

inline constexpr int kNumClasses = 4;

std::string damage_code(DamageClass c);
std::optional<DamageClass> damage_from_index(int idx);
std::optional<DamageClass> damage_from_code(const std::string& code);

/// Normalized center-format box, all fields in [0,1].
struct NormBox {
    double cx = 0, cy = 0, w = 0, h = 0;
};

/// Pixel corner-format box, x_min < x_max, y_min < y_max.
struct PixelBox {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
};

struct BoxError : std::runtime_error {
    explicit BoxError(const std::string& what) : std::runtime_error(what) {}
};

// Frame conversions use the record's own dims, never a global size.
PixelBox to_pixels(const NormBox& b, int img_w, int img_h);
NormBox to_normalized(const PixelBox& b, int img_w, int img_h);

/// Slack 1e-6 on the [0,1] bounds check.
bool norm_box_valid(const NormBox& b);

double iou(const PixelBox& a, const PixelBox& b);

}  // namespace rdd
