#include "rdd/boxes.hpp"

#include <algorithm>

namespace rdd {

std::string damage_code(DamageClass c) {
    switch (c) {
        case DamageClass::D00: return "D00";
        case DamageClass::D10: return "D10";
        case DamageClass::D20: return "D20";
        case DamageClass::D40: return "D40";
    }
    return "D??";
}

std::optional<DamageClass> damage_from_index(int idx) {
    if (idx < 0 || idx >= kNumClasses) return std::nullopt;
    return static_cast<DamageClass>(idx);
}

std::optional<DamageClass> damage_from_code(const std::string& code) {
    if (code == "D00") return DamageClass::D00;
    if (code == "D10") return DamageClass::D10;
    if (code == "D20") return DamageClass::D20;
    if (code == "D40") return DamageClass::D40;
    return std::nullopt;
}

PixelBox to_pixels(const NormBox& b, int img_w, int img_h) {
    return {(b.cx - b.w / 2.0) * img_w, (b.cy - b.h / 2.0) * img_h,
            (b.cx + b.w / 2.0) * img_w, (b.cy + b.h / 2.0) * img_h};
}

NormBox to_normalized(const PixelBox& b, int img_w, int img_h) {
    return {(b.x_min + b.x_max) / 2.0 / img_w, (b.y_min + b.y_max) / 2.0 / img_h,
            (b.x_max - b.x_min) / img_w, (b.y_max - b.y_min) / img_h};
}

bool norm_box_valid(const NormBox& b) {
    constexpr double slack = 1e-6;
    if (!(b.w > 0.0 && b.h > 0.0)) return false;
    const double x0 = b.cx - b.w / 2.0, x1 = b.cx + b.w / 2.0;
    const double y0 = b.cy - b.h / 2.0, y1 = b.cy + b.h / 2.0;
    return x0 >= -slack && x1 <= 1.0 + slack && y0 >= -slack && y1 <= 1.0 + slack;
}

double iou(const PixelBox& a, const PixelBox& b) {
    const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni <= 0.0 ? 0.0 : inter / uni;
}

}  // namespace rdd
