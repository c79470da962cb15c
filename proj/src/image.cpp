#include "rdd/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace rdd::img {

Image::Image(int w, int h, std::array<uint8_t, 3> fill) : width(w), height(h) {
    if (w < 0 || h < 0) throw std::invalid_argument("Image: negative dims");
    pixels.resize(3 * static_cast<size_t>(w) * h);
    for (size_t i = 0; i < pixels.size(); i += 3) {
        pixels[i] = fill[0];
        pixels[i + 1] = fill[1];
        pixels[i + 2] = fill[2];
    }
}

Image crop(const Image& src, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || x0 + w > src.width || y0 + h > src.height)
        throw std::out_of_range("crop: rect outside image");
    Image out(w, h);
    for (int y = 0; y < h; ++y)
        std::memcpy(out.px(0, y), src.px(x0, y0 + y), 3 * static_cast<size_t>(w));
    return out;
}

uint64_t checksum(const Image& im) {
    uint64_t hash = 1469598103934665603ull;
    auto mix = [&hash](uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            hash ^= (v >> (8 * i)) & 0xff;
            hash *= 1099511628211ull;
        }
    };
    mix(static_cast<uint64_t>(im.width));
    mix(static_cast<uint64_t>(im.height));
    for (uint8_t b : im.pixels) {
        hash ^= b;
        hash *= 1099511628211ull;
    }
    return hash;
}

void rgb_to_hsv(uint8_t r8, uint8_t g8, uint8_t b8, double& h, double& s, double& v) {
    const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx == 0.0 ? 0.0 : d / mx;
    if (d == 0.0) {
        h = 0.0;
        return;
    }
    if (mx == r)
        h = std::fmod((g - b) / d / 6.0 + 1.0, 1.0);
    else if (mx == g)
        h = ((b - r) / d + 2.0) / 6.0;
    else
        h = ((r - g) / d + 4.0) / 6.0;
}

void hsv_to_rgb(double h, double s, double v, uint8_t& r, uint8_t& g, uint8_t& b) {
    h = h - std::floor(h);  // wrap onto [0,1)
    const double hh = h * 6.0;
    const int i = static_cast<int>(hh) % 6;
    const double f = hh - std::floor(hh);
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    double rf, gf, bf;
    switch (i) {
        case 0: rf = v; gf = t; bf = p; break;
        case 1: rf = q; gf = v; bf = p; break;
        case 2: rf = p; gf = v; bf = t; break;
        case 3: rf = p; gf = q; bf = v; break;
        case 4: rf = t; gf = p; bf = v; break;
        default: rf = v; gf = p; bf = q; break;
    }
    auto q8 = [](double x) {
        return static_cast<uint8_t>(std::clamp(std::lround(x * 255.0), 0l, 255l));
    };
    r = q8(rf);
    g = q8(gf);
    b = q8(bf);
}

}  // namespace rdd::img
