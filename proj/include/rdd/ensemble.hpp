#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rdd/evalmetrics.hpp"
#include "rdd/image.hpp"

namespace rdd::ensemble {

using eval::Detection;

/// image_id -> detections for one model (tests use scripted stubs; a real
/// detector attaches through the prediction-CSV interface).
using Provider = std::function<std::vector<Detection>(const std::string& image_id)>;

struct DetectionSource {
    std::string name;
    Provider provider;
    double weight = 1.0;
};

enum class FusionMode { Wbf, Nms };

struct FusionConfig {
    double iou_thr = 0.55;
    FusionMode mode = FusionMode::Wbf;
    bool participation_scaling = true;
    std::map<std::string, double> source_weights;  // by source name, default 1
};

FusionConfig parse_fusion_config(const std::string& text);

/// Greedy NMS within one image+class: keep the highest score, suppress
/// overlaps with IoU >= thr, repeat. Output is a subset of the input.
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_thr);

/// Cluster per class by IoU >= thr against the cluster representative; the
/// fused box is the score*weight-weighted average of corners, the fused score
/// the weighted mean scaled by (contributing sources / total sources).
std::vector<Detection> weighted_box_fusion(
    const std::vector<std::vector<Detection>>& per_source,
    const std::vector<double>& weights, double iou_thr, bool participation_scaling = true);

// ---------------------------------------------------------------------------
// Test-time augmentation

struct TTAVariant {
    enum class Kind { Identity, HorizontalFlip, Scale };
    Kind kind = Kind::Identity;
    double scale = 1.0;  // for Kind::Scale

    static TTAVariant identity() { return {Kind::Identity, 1.0}; }
    static TTAVariant hflip() { return {Kind::HorizontalFlip, 1.0}; }
    static TTAVariant scaled(double s) { return {Kind::Scale, s}; }
};

/// Maps a box from the variant's transformed frame back to the original
/// image frame (image_width in original pixels).
PixelBox tta_inverse_box(const TTAVariant& v, const PixelBox& b, int image_width);
PixelBox tta_forward_box(const TTAVariant& v, const PixelBox& b, int image_width);

/// Provider invoked per variant on the transformed image id; detections are
/// inverse-mapped and fused with equal weights.
using VariantProvider =
    std::function<std::vector<Detection>(const std::string& image_id, const TTAVariant& v)>;

std::vector<Detection> tta_infer(const VariantProvider& provider, const std::string& image_id,
                                 int image_width, const std::vector<TTAVariant>& variants,
                                 const FusionConfig& cfg = {});

// ---------------------------------------------------------------------------

struct EnsembleProvenance {
    std::map<std::string, int> per_source_counts;  // source name -> raw det count
    std::vector<std::string> missing_sources;      // sources with no detections
};

std::pair<std::vector<Detection>, EnsembleProvenance> ensemble_run(
    const std::vector<DetectionSource>& sources, const std::vector<std::string>& image_ids,
    const FusionConfig& cfg);

}  // namespace rdd::ensemble
