#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace rdd::img {

/// Interleaved 8-bit RGB image, row-major from the top-left.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // 3 * width * height

    Image() = default;
    Image(int w, int h, std::array<uint8_t, 3> fill = {0, 0, 0});

    uint8_t* px(int x, int y) { return pixels.data() + 3 * (static_cast<size_t>(y) * width + x); }
    const uint8_t* px(int x, int y) const {
        return pixels.data() + 3 * (static_cast<size_t>(y) * width + x);
    }

    bool operator==(const Image&) const = default;
};

inline constexpr std::array<uint8_t, 3> kGrayFill = {114, 114, 114};

/// Axis-aligned sub-image copy; the rect must be inside the image.
Image crop(const Image& src, int x0, int y0, int w, int h);

/// FNV-1a over dims + pixel bytes; used as a determinism checksum in tests.
uint64_t checksum(const Image& im);

// Float HSV with h, s, v in [0,1); conversions used by the HSV jitter.
void rgb_to_hsv(uint8_t r, uint8_t g, uint8_t b, double& h, double& s, double& v);
void hsv_to_rgb(double h, double s, double v, uint8_t& r, uint8_t& g, uint8_t& b);

}  // namespace rdd::img
