#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rdd/boxes.hpp"
#include "rdd/image.hpp"
#include "rdd/numeric.hpp"

namespace rdd::aug {

/// Augmentation hyperparameters; the defaults are the detector family's
/// stock values, and `experimented()` is the tuned preset.
struct AugmentConfig {
    double hsv_h = 0.015;
    double hsv_s = 0.7;
    double hsv_v = 0.4;
    double degrees = 0.0;
    double translate = 0.2;
    double scale = 0.9;
    double shear = 0.0;
    double perspective = 0.0;
    double flipud = 0.0;
    double fliplr = 0.5;
    double mosaic = 1.0;
    double mixup = 0.15;
    double copy_paste = 0.0;  // alias of paste_in; kept for config compatibility
    double paste_in = 0.15;

    static AugmentConfig defaults() { return {}; }
    /// scale 0.7, shear 0.01, perspective 0.0001, mosaic 0.5, mixup 0.1,
    /// paste_in 0.05; everything else as defaults.
    static AugmentConfig experimented();
    /// All gains and probabilities zero; the pipeline becomes letterbox-only.
    static AugmentConfig identity();

    void validate() const;
};

AugmentConfig parse_config(const std::string& text);
std::string write_config(const AugmentConfig& cfg);

struct LabeledBox {
    DamageClass cls;
    PixelBox box;
};

struct Sample {
    std::string id;
    img::Image image;
    std::vector<LabeledBox> boxes;
};

/// 3x3 homogeneous transform plus the raw draws it was composed from.
struct AffineSpec {
    std::array<double, 9> m = {1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
    double angle_deg = 0.0;
    double scale_gain = 1.0;
    double shear_x_deg = 0.0, shear_y_deg = 0.0;
    double translate_x = 0.0, translate_y = 0.0;  // fractions of out size
    double persp_x = 0.0, persp_y = 0.0;

    bool is_identity() const;
    bool invertible() const;
};

struct ProvenanceOp {
    std::string op;            // "mosaic", "letterbox", "affine", "hsv", ...
    std::string detail;        // free-form parameters
};

struct AugmentedSample {
    img::Image image;
    std::vector<LabeledBox> boxes;
    std::vector<std::string> source_ids;
    AffineSpec affine;
    std::vector<ProvenanceOp> ops;
};

std::string provenance_json(const AugmentedSample& s);

// Box survival after geometric transforms.
inline constexpr double kMinBoxSidePx = 2.0;
inline constexpr double kMinAreaRatio = 0.1;

/// Composes center -> rotation/scale -> shear -> perspective -> translate.
/// Draw order is fixed so a seed fully determines the spec.
AffineSpec sample_affine(const AugmentConfig& cfg, Rng& rng, int out_size);

/// Bilinear warp onto an out_size square, gray fill outside the source.
/// Boxes go through the 4-corner axis-aligned hull, canvas clip, and the
/// survival thresholds (area ratio is measured against scale_gain^2).
AugmentedSample apply_affine(const img::Image& image, const std::vector<LabeledBox>& boxes,
                             const AffineSpec& spec, int out_size);

/// Per-image random gains in 1 +/- fraction; hue wraps, s/v clamp.
img::Image hsv_jitter(const img::Image& image, std::array<double, 3> fractions, Rng& rng);

img::Image flip_lr(const img::Image& image);
img::Image flip_ud(const img::Image& image);
PixelBox flip_lr_box(const PixelBox& b, int width);
PixelBox flip_ud_box(const PixelBox& b, int height);

/// Scale-to-fit letterbox onto an S x S gray canvas, centered.
AugmentedSample letterbox(const Sample& s, int out_size);

/// 2S x 2S gray canvas, random center in [S/2, 3S/2]^2, four images scaled
/// into the quadrants meeting at the center.
AugmentedSample mosaic4(const std::array<Sample, 4>& samples, int out_size, Rng& rng);

/// Pixel blend lambda*a + (1-lambda)*b, lambda ~ Beta(8,8); box union.
AugmentedSample mixup(const AugmentedSample& a, const AugmentedSample& b, Rng& rng);

struct DonorCrop {
    DamageClass cls;
    img::Image patch;
};

/// Each donor pastes with probability p at a uniform location whose box keeps
/// IoU < 0.3 against every existing box; donors that cannot be placed after
/// 30 tries are skipped.
AugmentedSample paste_in(const AugmentedSample& dst, const std::vector<DonorCrop>& donors,
                         double p, Rng& rng);

/// Supplies source samples to the pipeline; called once per needed image.
using SampleSource = std::function<Sample()>;

/// mosaic-or-letterbox, affine, hsv, flips, mixup (second pipeline draw),
/// paste_in; provenance records every applied op and its draws.
AugmentedSample pipeline(const AugmentConfig& cfg, const SampleSource& source, int out_size,
                         Rng& rng, const std::vector<DonorCrop>& donors = {});

}  // namespace rdd::aug
