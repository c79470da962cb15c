#pragma once

#include <map>
#include <string>
#include <vector>

#include "rdd/boxes.hpp"

namespace rdd::eval {

struct Detection {
    std::string image_id;
    DamageClass cls;
    PixelBox box;
    double score = 0.0;
};

struct GroundTruth {
    std::string image_id;
    DamageClass cls;
    PixelBox box;
};

struct MatchResult {
    // parallel to the score-sorted detections
    std::vector<bool> is_tp;
    std::vector<int> matched_gt;   // -1 for FP
    std::vector<bool> gt_matched;  // parallel to gts
    std::vector<size_t> order;     // sort permutation applied to the input dets
};

/// Greedy matching within one image+class: detections by descending score
/// (ties keep input order), each claims the unmatched gt with the highest
/// IoU >= thr.
MatchResult match(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                  double iou_thr);

struct F1Result {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    int tp = 0, fp = 0, fn = 0;
};

F1Result f1_at(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
               double iou_thr, double conf_thr);

struct PRCurve {
    std::vector<double> scores;     // descending cut points
    std::vector<double> precision;  // cumulative, parallel to scores
    std::vector<double> recall;     // non-decreasing
    double ap = 0.0;
};

/// All-point interpolation: AP is the area under the precision envelope
/// p(r) = max precision at recall >= r.
PRCurve average_precision(const std::vector<Detection>& dets,
                          const std::vector<GroundTruth>& gts, double iou_thr);

struct MapResult {
    std::map<DamageClass, double> per_class_ap;
    double map = 0.0;  // mean over classes with >= 1 gt box
};

MapResult map50(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                double iou_thr = 0.5);

/// f1_at evaluated at every distinct detection score; ties go to the lower
/// threshold. Empty detections give (0, 0).
std::pair<double, F1Result> best_f1_sweep(const std::vector<Detection>& dets,
                                          const std::vector<GroundTruth>& gts, double iou_thr);

// ---------------------------------------------------------------------------
// I/O: prediction CSV (image_id,class_code,x_min,y_min,x_max,y_max,score) and
// the JSON report.

std::vector<Detection> read_predictions_csv(const std::string& text);
std::string write_predictions_csv(const std::vector<Detection>& dets);

std::string report_json(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                        double iou_thr, double conf_thr);

}  // namespace rdd::eval
