#include "rdd/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rdd::aug {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Mat3 = std::array<double, 9>;

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i * 3 + j] += a[i * 3 + k] * b[k * 3 + j];
    return r;
}

bool mat_invert(const Mat3& m, Mat3& out) {
    const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                       m[2] * (m[3] * m[7] - m[4] * m[6]);
    if (std::abs(det) < 1e-12) return false;
    const double id = 1.0 / det;
    out = {(m[4] * m[8] - m[5] * m[7]) * id, (m[2] * m[7] - m[1] * m[8]) * id,
           (m[1] * m[5] - m[2] * m[4]) * id, (m[5] * m[6] - m[3] * m[8]) * id,
           (m[0] * m[8] - m[2] * m[6]) * id, (m[2] * m[3] - m[0] * m[5]) * id,
           (m[3] * m[7] - m[4] * m[6]) * id, (m[1] * m[6] - m[0] * m[7]) * id,
           (m[0] * m[4] - m[1] * m[3]) * id};
    return true;
}

void apply_h(const Mat3& m, double x, double y, double& ox, double& oy) {
    const double w = m[6] * x + m[7] * y + m[8];
    ox = (m[0] * x + m[1] * y + m[2]) / w;
    oy = (m[3] * x + m[4] * y + m[5]) / w;
}

// Full input->output pixel map: center the input, apply the sampled core,
// recenter on the output canvas.
Mat3 full_matrix(const AffineSpec& spec, int in_w, int in_h, int out_size) {
    const Mat3 to_center = {1, 0, -in_w / 2.0, 0, 1, -in_h / 2.0, 0, 0, 1};
    const Mat3 from_center = {1, 0, out_size / 2.0, 0, 1, out_size / 2.0, 0, 0, 1};
    return mat_mul(from_center, mat_mul(spec.m, to_center));
}

uint8_t sample_bilinear(const img::Image& im, double x, double y, int ch) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    auto at = [&](int xi, int yi) -> double {
        if (xi < 0 || yi < 0 || xi >= im.width || yi >= im.height)
            return img::kGrayFill[ch];
        return im.px(xi, yi)[ch];
    };
    const double v = at(x0, y0) * (1 - fx) * (1 - fy) + at(x0 + 1, y0) * fx * (1 - fy) +
                     at(x0, y0 + 1) * (1 - fx) * fy + at(x0 + 1, y0 + 1) * fx * fy;
    return static_cast<uint8_t>(std::clamp(std::lround(v), 0l, 255l));
}

img::Image resize_bilinear(const img::Image& src, int w, int h) {
    if (w == src.width && h == src.height) return src;
    img::Image out(w, h);
    const double sx = static_cast<double>(src.width) / w;
    const double sy = static_cast<double>(src.height) / h;
    for (int y = 0; y < h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
        for (int x = 0; x < w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
            for (int c = 0; c < 3; ++c) out.px(x, y)[c] = sample_bilinear(src, fx, fy, c);
        }
    }
    return out;
}

std::optional<PixelBox> clip_box(const PixelBox& b, double canvas, double min_side) {
    PixelBox c{std::max(b.x_min, 0.0), std::max(b.y_min, 0.0), std::min(b.x_max, canvas),
               std::min(b.y_max, canvas)};
    if (c.width() < min_side || c.height() < min_side) return std::nullopt;
    return c;
}

}  // namespace

AugmentConfig AugmentConfig::experimented() {
    AugmentConfig c;
    c.scale = 0.7;
    c.shear = 0.01;
    c.perspective = 0.0001;
    c.mosaic = 0.5;
    c.mixup = 0.1;
    c.paste_in = 0.05;
    return c;
}

AugmentConfig AugmentConfig::identity() {
    AugmentConfig c;
    c.hsv_h = c.hsv_s = c.hsv_v = 0.0;
    c.degrees = c.translate = c.scale = c.shear = c.perspective = 0.0;
    c.flipud = c.fliplr = c.mosaic = c.mixup = c.copy_paste = c.paste_in = 0.0;
    return c;
}

void AugmentConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument(std::string("augment config: ") + name +
                                        " must be a probability in [0,1]");
    };
    auto frac = [](double f, const char* name) {
        if (f < 0.0)
            throw std::invalid_argument(std::string("augment config: ") + name +
                                        " must be >= 0");
    };
    frac(hsv_h, "hsv_h");
    frac(hsv_s, "hsv_s");
    frac(hsv_v, "hsv_v");
    frac(degrees, "degrees");
    frac(translate, "translate");
    frac(scale, "scale");
    frac(shear, "shear");
    frac(perspective, "perspective");
    prob(flipud, "flipud");
    prob(fliplr, "fliplr");
    prob(mosaic, "mosaic");
    prob(mixup, "mixup");
    prob(copy_paste, "copy_paste");
    prob(paste_in, "paste_in");
}

AugmentConfig parse_config(const std::string& text) {
    AugmentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string key, value;
        if (!(ls >> key)) continue;
        if (!key.empty() && key.back() == ':') key.pop_back();
        if (!(ls >> value))
            throw std::runtime_error("augment config line " + std::to_string(line_no) +
                                     ": missing value for '" + key + "'");
        double v;
        try {
            v = std::stod(value);
        } catch (const std::exception&) {
            throw std::runtime_error("augment config line " + std::to_string(line_no) +
                                     ": bad number '" + value + "'");
        }
        if (key == "hsv_h") cfg.hsv_h = v;
        else if (key == "hsv_s") cfg.hsv_s = v;
        else if (key == "hsv_v") cfg.hsv_v = v;
        else if (key == "degrees") cfg.degrees = v;
        else if (key == "translate") cfg.translate = v;
        else if (key == "scale") cfg.scale = v;
        else if (key == "shear") cfg.shear = v;
        else if (key == "perspective") cfg.perspective = v;
        else if (key == "flipud") cfg.flipud = v;
        else if (key == "fliplr") cfg.fliplr = v;
        else if (key == "mosaic") cfg.mosaic = v;
        else if (key == "mixup") cfg.mixup = v;
        else if (key == "copy_paste") cfg.copy_paste = v;
        else if (key == "paste_in") cfg.paste_in = v;
        else
            throw std::runtime_error("augment config line " + std::to_string(line_no) +
                                     ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

std::string write_config(const AugmentConfig& cfg) {
    std::ostringstream os;
    os << "hsv_h: " << cfg.hsv_h << "\nhsv_s: " << cfg.hsv_s << "\nhsv_v: " << cfg.hsv_v
       << "\ndegrees: " << cfg.degrees << "\ntranslate: " << cfg.translate
       << "\nscale: " << cfg.scale << "\nshear: " << cfg.shear
       << "\nperspective: " << cfg.perspective << "\nflipud: " << cfg.flipud
       << "\nfliplr: " << cfg.fliplr << "\nmosaic: " << cfg.mosaic << "\nmixup: " << cfg.mixup
       << "\ncopy_paste: " << cfg.copy_paste << "\npaste_in: " << cfg.paste_in << "\n";
    return os.str();
}

bool AffineSpec::is_identity() const {
    static constexpr Mat3 id = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return m == id;
}

bool AffineSpec::invertible() const {
    return std::abs(m[0] * m[4] - m[1] * m[3]) > 1e-12;
}

AffineSpec sample_affine(const AugmentConfig& cfg, Rng& rng, int out_size) {
    cfg.validate();
    AffineSpec s;
    s.angle_deg = rng.uniform(-cfg.degrees, cfg.degrees);
    s.scale_gain = rng.uniform(1.0 - cfg.scale, 1.0 + cfg.scale);
    s.shear_x_deg = rng.uniform(-cfg.shear, cfg.shear);
    s.shear_y_deg = rng.uniform(-cfg.shear, cfg.shear);
    s.persp_x = rng.uniform(-cfg.perspective, cfg.perspective);
    s.persp_y = rng.uniform(-cfg.perspective, cfg.perspective);
    s.translate_x = rng.uniform(-cfg.translate, cfg.translate);
    s.translate_y = rng.uniform(-cfg.translate, cfg.translate);

    if (cfg.degrees == 0.0 && cfg.scale == 0.0 && cfg.shear == 0.0 && cfg.perspective == 0.0 &&
        cfg.translate == 0.0) {
        return s;  // identity matrix, draws recorded as zeros/ones
    }

    const double a = s.angle_deg * kPi / 180.0;
    const Mat3 rot_scale = {s.scale_gain * std::cos(a), -s.scale_gain * std::sin(a), 0,
                            s.scale_gain * std::sin(a), s.scale_gain * std::cos(a),  0,
                            0, 0, 1};
    const Mat3 shear = {1, std::tan(s.shear_x_deg * kPi / 180.0), 0,
                        std::tan(s.shear_y_deg * kPi / 180.0), 1, 0,
                        0, 0, 1};
    const Mat3 persp = {1, 0, 0, 0, 1, 0, s.persp_x, s.persp_y, 1};
    const Mat3 trans = {1, 0, s.translate_x * out_size, 0, 1, s.translate_y * out_size, 0, 0, 1};
    s.m = mat_mul(trans, mat_mul(persp, mat_mul(shear, rot_scale)));
    return s;
}

AugmentedSample apply_affine(const img::Image& image, const std::vector<LabeledBox>& boxes,
                             const AffineSpec& spec, int out_size) {
    if (!spec.invertible())
        throw std::invalid_argument("apply_affine: transform is not invertible");

    AugmentedSample out;
    out.affine = spec;

    if (spec.is_identity() && image.width == out_size && image.height == out_size) {
        out.image = image;
        out.boxes = boxes;
        out.ops.push_back({"affine", "identity"});
        return out;
    }

    const Mat3 fwd = full_matrix(spec, image.width, image.height, out_size);
    Mat3 inv;
    if (!mat_invert(fwd, inv))
        throw std::invalid_argument("apply_affine: transform is not invertible");

    out.image = img::Image(out_size, out_size, img::kGrayFill);
    for (int y = 0; y < out_size; ++y) {
        for (int x = 0; x < out_size; ++x) {
            double sx, sy;
            apply_h(inv, x, y, sx, sy);
            if (sx < -1.0 || sy < -1.0 || sx > image.width || sy > image.height) continue;
            for (int c = 0; c < 3; ++c)
                out.image.px(x, y)[c] = sample_bilinear(image, sx, sy, c);
        }
    }

    for (const auto& lb : boxes) {
        const double xs[2] = {lb.box.x_min, lb.box.x_max};
        const double ys[2] = {lb.box.y_min, lb.box.y_max};
        PixelBox hull{1e30, 1e30, -1e30, -1e30};
        for (double bx : xs) {
            for (double by : ys) {
                double ox, oy;
                apply_h(fwd, bx, by, ox, oy);
                hull.x_min = std::min(hull.x_min, ox);
                hull.y_min = std::min(hull.y_min, oy);
                hull.x_max = std::max(hull.x_max, ox);
                hull.y_max = std::max(hull.y_max, oy);
            }
        }
        auto clipped = clip_box(hull, out_size, kMinBoxSidePx);
        if (!clipped) continue;
        const double old_area = lb.box.area() * spec.scale_gain * spec.scale_gain;
        if (old_area <= 0.0 || clipped->area() / old_area < kMinAreaRatio) continue;
        out.boxes.push_back({lb.cls, *clipped});
    }
    out.ops.push_back({"affine", "angle=" + std::to_string(spec.angle_deg) +
                                     " gain=" + std::to_string(spec.scale_gain)});
    return out;
}

img::Image hsv_jitter(const img::Image& image, std::array<double, 3> fractions, Rng& rng) {
    for (double f : fractions)
        if (f < 0.0) throw std::invalid_argument("hsv_jitter: fractions must be >= 0");
    if (fractions[0] == 0.0 && fractions[1] == 0.0 && fractions[2] == 0.0) return image;

    const double rh = 1.0 + fractions[0] * rng.uniform(-1.0, 1.0);
    const double rs = 1.0 + fractions[1] * rng.uniform(-1.0, 1.0);
    const double rv = 1.0 + fractions[2] * rng.uniform(-1.0, 1.0);

    img::Image out = image;
    for (size_t i = 0; i < out.pixels.size(); i += 3) {
        double h, s, v;
        img::rgb_to_hsv(out.pixels[i], out.pixels[i + 1], out.pixels[i + 2], h, s, v);
        h = h * rh;  // wrapped onto the wheel inside hsv_to_rgb
        s = std::clamp(s * rs, 0.0, 1.0);
        v = std::clamp(v * rv, 0.0, 1.0);
        img::hsv_to_rgb(h, s, v, out.pixels[i], out.pixels[i + 1], out.pixels[i + 2]);
    }
    return out;
}

img::Image flip_lr(const img::Image& image) {
    img::Image out(image.width, image.height);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            std::memcpy(out.px(x, y), image.px(image.width - 1 - x, y), 3);
    return out;
}

img::Image flip_ud(const img::Image& image) {
    img::Image out(image.width, image.height);
    for (int y = 0; y < image.height; ++y)
        std::memcpy(out.px(0, y), image.px(0, image.height - 1 - y),
                    3 * static_cast<size_t>(image.width));
    return out;
}

PixelBox flip_lr_box(const PixelBox& b, int width) {
    return {width - b.x_max, b.y_min, width - b.x_min, b.y_max};
}

PixelBox flip_ud_box(const PixelBox& b, int height) {
    return {b.x_min, height - b.y_max, b.x_max, height - b.y_min};
}

AugmentedSample letterbox(const Sample& s, int out_size) {
    AugmentedSample out;
    out.source_ids.push_back(s.id);

    if (s.image.width == out_size && s.image.height == out_size) {
        out.image = s.image;
        out.boxes = s.boxes;
        out.ops.push_back({"letterbox", "identity"});
        return out;
    }

    const double scale = std::min(static_cast<double>(out_size) / s.image.width,
                                  static_cast<double>(out_size) / s.image.height);
    const int new_w = std::max(1, static_cast<int>(std::lround(s.image.width * scale)));
    const int new_h = std::max(1, static_cast<int>(std::lround(s.image.height * scale)));
    const int off_x = (out_size - new_w) / 2;
    const int off_y = (out_size - new_h) / 2;

    img::Image resized = resize_bilinear(s.image, new_w, new_h);
    out.image = img::Image(out_size, out_size, img::kGrayFill);
    for (int y = 0; y < new_h; ++y)
        std::memcpy(out.image.px(off_x, off_y + y), resized.px(0, y),
                    3 * static_cast<size_t>(new_w));

    const double sx = static_cast<double>(new_w) / s.image.width;
    const double sy = static_cast<double>(new_h) / s.image.height;
    for (const auto& lb : s.boxes) {
        PixelBox b{lb.box.x_min * sx + off_x, lb.box.y_min * sy + off_y,
                   lb.box.x_max * sx + off_x, lb.box.y_max * sy + off_y};
        if (auto c = clip_box(b, out_size, kMinBoxSidePx)) out.boxes.push_back({lb.cls, *c});
    }
    out.ops.push_back({"letterbox", "scale=" + std::to_string(scale)});
    return out;
}

AugmentedSample mosaic4(const std::array<Sample, 4>& samples, int out_size, Rng& rng) {
    const int S = out_size;
    const double cx = rng.uniform(S / 2.0, 3.0 * S / 2.0);
    const double cy = rng.uniform(S / 2.0, 3.0 * S / 2.0);
    const int icx = static_cast<int>(std::lround(cx));
    const int icy = static_cast<int>(std::lround(cy));

    AugmentedSample out;
    out.image = img::Image(2 * S, 2 * S, img::kGrayFill);

    // quadrant rects in placement order: top-left, top-right, bottom-left, bottom-right
    struct Rect {
        int x0, y0, x1, y1;
    };
    const Rect rects[4] = {{0, 0, icx, icy},
                           {icx, 0, 2 * S, icy},
                           {0, icy, icx, 2 * S},
                           {icx, icy, 2 * S, 2 * S}};

    for (int q = 0; q < 4; ++q) {
        const Sample& s = samples[q];
        out.source_ids.push_back(s.id);
        const int rw = rects[q].x1 - rects[q].x0;
        const int rh = rects[q].y1 - rects[q].y0;
        if (rw <= 0 || rh <= 0) continue;

        // scale to cover the quadrant, crop the excess on the sides away
        // from the shared center
        const double scale = std::max(static_cast<double>(rw) / s.image.width,
                                      static_cast<double>(rh) / s.image.height);
        const int sw = std::max(rw, static_cast<int>(std::lround(s.image.width * scale)));
        const int sh = std::max(rh, static_cast<int>(std::lround(s.image.height * scale)));
        img::Image scaled = resize_bilinear(s.image, sw, sh);

        // anchor the image corner nearest the mosaic center
        const int src_x0 = (q == 0 || q == 2) ? sw - rw : 0;
        const int src_y0 = (q == 0 || q == 1) ? sh - rh : 0;
        for (int y = 0; y < rh; ++y)
            std::memcpy(out.image.px(rects[q].x0, rects[q].y0 + y),
                        scaled.px(src_x0, src_y0 + y), 3 * static_cast<size_t>(rw));

        const double fx = static_cast<double>(sw) / s.image.width;
        const double fy = static_cast<double>(sh) / s.image.height;
        for (const auto& lb : s.boxes) {
            PixelBox b{lb.box.x_min * fx - src_x0 + rects[q].x0,
                       lb.box.y_min * fy - src_y0 + rects[q].y0,
                       lb.box.x_max * fx - src_x0 + rects[q].x0,
                       lb.box.y_max * fy - src_y0 + rects[q].y0};
            PixelBox clipped{std::max(b.x_min, static_cast<double>(rects[q].x0)),
                             std::max(b.y_min, static_cast<double>(rects[q].y0)),
                             std::min(b.x_max, static_cast<double>(rects[q].x1)),
                             std::min(b.y_max, static_cast<double>(rects[q].y1))};
            if (clipped.width() < kMinBoxSidePx || clipped.height() < kMinBoxSidePx) continue;
            out.boxes.push_back({lb.cls, clipped});
        }
    }
    out.ops.push_back({"mosaic", "center=" + std::to_string(icx) + "," + std::to_string(icy)});
    return out;
}

AugmentedSample mixup(const AugmentedSample& a, const AugmentedSample& b, Rng& rng) {
    if (a.image.width != b.image.width || a.image.height != b.image.height)
        throw std::invalid_argument("mixup: image dims differ");
    const double lambda = rng.beta(8.0, 8.0);

    AugmentedSample out = a;
    for (size_t i = 0; i < out.image.pixels.size(); ++i) {
        const double v = lambda * a.image.pixels[i] + (1.0 - lambda) * b.image.pixels[i];
        out.image.pixels[i] = static_cast<uint8_t>(std::clamp(std::lround(v), 0l, 255l));
    }
    out.boxes.insert(out.boxes.end(), b.boxes.begin(), b.boxes.end());
    out.source_ids.insert(out.source_ids.end(), b.source_ids.begin(), b.source_ids.end());
    out.ops.push_back({"mixup", "lambda=" + std::to_string(lambda)});
    return out;
}

AugmentedSample paste_in(const AugmentedSample& dst, const std::vector<DonorCrop>& donors,
                         double p, Rng& rng) {
    AugmentedSample out = dst;
    for (const auto& donor : donors) {
        if (rng.uniform() >= p) continue;
        const int pw = donor.patch.width, ph = donor.patch.height;
        if (pw > out.image.width || ph > out.image.height) continue;

        bool placed = false;
        for (int attempt = 0; attempt < 30 && !placed; ++attempt) {
            const int x = static_cast<int>(rng.bounded(out.image.width - pw + 1));
            const int y = static_cast<int>(rng.bounded(out.image.height - ph + 1));
            const PixelBox candidate{static_cast<double>(x), static_cast<double>(y),
                                     static_cast<double>(x + pw), static_cast<double>(y + ph)};
            bool ok = true;
            for (const auto& lb : out.boxes) {
                if (iou(candidate, lb.box) >= 0.3) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            for (int yy = 0; yy < ph; ++yy)
                std::memcpy(out.image.px(x, y + yy), donor.patch.px(0, yy),
                            3 * static_cast<size_t>(pw));
            out.boxes.push_back({donor.cls, candidate});
            out.ops.push_back({"paste_in", "at=" + std::to_string(x) + "," + std::to_string(y)});
            placed = true;
        }
    }
    return out;
}

namespace {

AugmentedSample pipeline_impl(const AugmentConfig& cfg, const SampleSource& source, int out_size,
                              Rng& rng, const std::vector<DonorCrop>& donors, bool allow_mixup) {
    AugmentedSample base;
    if (rng.uniform() < cfg.mosaic) {
        std::array<Sample, 4> four = {source(), source(), source(), source()};
        base = mosaic4(four, out_size, rng);
    } else {
        base = letterbox(source(), out_size);
    }

    AffineSpec spec = sample_affine(cfg, rng, out_size);
    AugmentedSample warped = apply_affine(base.image, base.boxes, spec, out_size);
    warped.source_ids = base.source_ids;
    warped.ops.insert(warped.ops.begin(), base.ops.begin(), base.ops.end());

    warped.image = hsv_jitter(warped.image, {cfg.hsv_h, cfg.hsv_s, cfg.hsv_v}, rng);
    if (cfg.hsv_h > 0.0 || cfg.hsv_s > 0.0 || cfg.hsv_v > 0.0)
        warped.ops.push_back({"hsv", "jitter"});

    if (rng.uniform() < cfg.flipud) {
        warped.image = flip_ud(warped.image);
        for (auto& lb : warped.boxes) lb.box = flip_ud_box(lb.box, out_size);
        warped.ops.push_back({"flipud", ""});
    }
    if (rng.uniform() < cfg.fliplr) {
        warped.image = flip_lr(warped.image);
        for (auto& lb : warped.boxes) lb.box = flip_lr_box(lb.box, out_size);
        warped.ops.push_back({"fliplr", ""});
    }

    if (allow_mixup && rng.uniform() < cfg.mixup) {
        AugmentedSample other = pipeline_impl(cfg, source, out_size, rng, {}, false);
        warped = mixup(warped, other, rng);
    }

    if (!donors.empty() && cfg.paste_in > 0.0)
        warped = paste_in(warped, donors, cfg.paste_in, rng);

    return warped;
}

}  // namespace

AugmentedSample pipeline(const AugmentConfig& cfg, const SampleSource& source, int out_size,
                         Rng& rng, const std::vector<DonorCrop>& donors) {
    cfg.validate();
    return pipeline_impl(cfg, source, out_size, rng, donors, true);
}

std::string provenance_json(const AugmentedSample& s) {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& op : s.ops) ops.push_back({{"op", op.op}, {"detail", op.detail}});
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& lb : s.boxes)
        boxes.push_back({{"class", damage_code(lb.cls)},
                         {"x_min", lb.box.x_min},
                         {"y_min", lb.box.y_min},
                         {"x_max", lb.box.x_max},
                         {"y_max", lb.box.y_max}});
    nlohmann::json j = {{"sources", s.source_ids},
                        {"ops", ops},
                        {"boxes", boxes},
                        {"affine",
                         {{"angle_deg", s.affine.angle_deg},
                          {"scale_gain", s.affine.scale_gain},
                          {"shear_x_deg", s.affine.shear_x_deg},
                          {"shear_y_deg", s.affine.shear_y_deg},
                          {"translate_x", s.affine.translate_x},
                          {"translate_y", s.affine.translate_y},
                          {"perspective_x", s.affine.persp_x},
                          {"perspective_y", s.affine.persp_y}}}};
    return j.dump(2);
}

}  // namespace rdd::aug
