#include "rdd/evalmetrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace rdd::eval {

namespace {

std::vector<size_t> score_order(const std::vector<Detection>& dets) {
    std::vector<size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });
    return order;
}

using GroupKey = std::pair<std::string, int>;

template <typename T>
std::map<GroupKey, std::vector<T>> group_by_image_class(const std::vector<T>& items) {
    std::map<GroupKey, std::vector<T>> out;
    for (const auto& it : items)
        out[{it.image_id, static_cast<int>(it.cls)}].push_back(it);
    return out;
}

// Per-detection TP flags for one class, over all images, in score-sorted order.
struct ClassSweep {
    std::vector<double> scores;  // descending
    std::vector<char> tp;
    int n_gt = 0;
};

ClassSweep sweep_class(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                       DamageClass cls, double iou_thr) {
    ClassSweep sw;
    std::map<std::string, std::vector<Detection>> dets_by_img;
    std::map<std::string, std::vector<GroundTruth>> gts_by_img;
    for (const auto& d : dets)
        if (d.cls == cls) dets_by_img[d.image_id].push_back(d);
    for (const auto& g : gts)
        if (g.cls == cls) {
            gts_by_img[g.image_id].push_back(g);
            ++sw.n_gt;
        }

    std::vector<std::pair<double, char>> flagged;
    for (const auto& [img, img_dets] : dets_by_img) {
        auto git = gts_by_img.find(img);
        static const std::vector<GroundTruth> none;
        const auto& img_gts = git == gts_by_img.end() ? none : git->second;
        MatchResult m = match(img_dets, img_gts, iou_thr);
        for (size_t k = 0; k < m.order.size(); ++k)
            flagged.emplace_back(img_dets[m.order[k]].score, m.is_tp[k] ? 1 : 0);
    }
    std::stable_sort(flagged.begin(), flagged.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [s, t] : flagged) {
        sw.scores.push_back(s);
        sw.tp.push_back(t);
    }
    return sw;
}

}  // namespace

MatchResult match(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                  double iou_thr) {
    MatchResult res;
    res.order = score_order(dets);
    res.is_tp.assign(dets.size(), false);
    res.matched_gt.assign(dets.size(), -1);
    res.gt_matched.assign(gts.size(), false);

    for (size_t k = 0; k < res.order.size(); ++k) {
        const Detection& d = dets[res.order[k]];
        double best = iou_thr;
        int best_gt = -1;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (res.gt_matched[g]) continue;
            const double v = iou(d.box, gts[g].box);
            if (v >= best && (best_gt < 0 || v > best)) {
                best = v;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0) {
            res.is_tp[k] = true;
            res.matched_gt[k] = best_gt;
            res.gt_matched[best_gt] = true;
        }
    }
    return res;
}

F1Result f1_at(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
               double iou_thr, double conf_thr) {
    std::vector<Detection> kept;
    for (const auto& d : dets)
        if (d.score >= conf_thr) kept.push_back(d);

    F1Result r;
    auto det_groups = group_by_image_class(kept);
    auto gt_groups = group_by_image_class(gts);
    for (const auto& [key, group_dets] : det_groups) {
        auto git = gt_groups.find(key);
        static const std::vector<GroundTruth> none;
        MatchResult m = match(group_dets, git == gt_groups.end() ? none : git->second, iou_thr);
        for (bool tp : m.is_tp) tp ? ++r.tp : ++r.fp;
    }
    const int n_gt = static_cast<int>(gts.size());
    r.fn = n_gt - r.tp;
    r.precision = (r.tp + r.fp) > 0 ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
    r.recall = n_gt > 0 ? static_cast<double>(r.tp) / n_gt : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

PRCurve average_precision(const std::vector<Detection>& dets,
                          const std::vector<GroundTruth>& gts, double iou_thr) {
    // single-class view: callers pass one class's boxes; mixed classes are
    // matched class-by-class anyway
    std::map<int, ClassSweep> sweeps;
    std::set<int> classes;
    for (const auto& d : dets) classes.insert(static_cast<int>(d.cls));
    for (const auto& g : gts) classes.insert(static_cast<int>(g.cls));

    // Merge all class sweeps into one ranked list (usual for the single-class
    // case; multi-class callers should use map50).
    std::vector<std::pair<double, char>> flagged;
    int n_gt = 0;
    for (int c : classes) {
        ClassSweep sw = sweep_class(dets, gts, static_cast<DamageClass>(c), iou_thr);
        n_gt += sw.n_gt;
        for (size_t i = 0; i < sw.scores.size(); ++i) flagged.emplace_back(sw.scores[i], sw.tp[i]);
    }
    std::stable_sort(flagged.begin(), flagged.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    PRCurve pr;
    int tp = 0, fp = 0;
    for (const auto& [score, is_tp] : flagged) {
        is_tp ? ++tp : ++fp;
        pr.scores.push_back(score);
        pr.precision.push_back(static_cast<double>(tp) / (tp + fp));
        pr.recall.push_back(n_gt > 0 ? static_cast<double>(tp) / n_gt : 0.0);
    }

    // area under the precision envelope
    double ap = 0.0;
    double prev_recall = 0.0;
    for (size_t k = 0; k < pr.scores.size(); ++k) {
        if (pr.recall[k] <= prev_recall) continue;
        double envelope = 0.0;
        for (size_t j = k; j < pr.scores.size(); ++j) envelope = std::max(envelope, pr.precision[j]);
        ap += (pr.recall[k] - prev_recall) * envelope;
        prev_recall = pr.recall[k];
    }
    pr.ap = ap;
    return pr;
}

MapResult map50(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                double iou_thr) {
    MapResult res;
    std::set<int> gt_classes;
    for (const auto& g : gts) gt_classes.insert(static_cast<int>(g.cls));
    if (gt_classes.empty()) return res;

    double sum = 0.0;
    for (int c : gt_classes) {
        const auto cls = static_cast<DamageClass>(c);
        std::vector<Detection> cd;
        std::vector<GroundTruth> cg;
        for (const auto& d : dets)
            if (d.cls == cls) cd.push_back(d);
        for (const auto& g : gts)
            if (g.cls == cls) cg.push_back(g);
        const double ap = average_precision(cd, cg, iou_thr).ap;
        res.per_class_ap[cls] = ap;
        sum += ap;
    }
    res.map = sum / static_cast<double>(gt_classes.size());
    return res;
}

std::pair<double, F1Result> best_f1_sweep(const std::vector<Detection>& dets,
                                          const std::vector<GroundTruth>& gts, double iou_thr) {
    if (dets.empty()) return {0.0, F1Result{}};
    std::vector<double> thresholds;
    for (const auto& d : dets) thresholds.push_back(d.score);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    double best_conf = thresholds.front();
    F1Result best = f1_at(dets, gts, iou_thr, best_conf);
    for (size_t i = 1; i < thresholds.size(); ++i) {
        F1Result r = f1_at(dets, gts, iou_thr, thresholds[i]);
        if (r.f1 > best.f1) {
            best = r;
            best_conf = thresholds[i];
        }
    }
    return {best_conf, best};
}

std::vector<Detection> read_predictions_csv(const std::string& text) {
    std::vector<Detection> out;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line.starts_with("image_id")) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 7)
            throw std::runtime_error("predictions csv line " + std::to_string(line_no) +
                                     ": expected 7 fields");
        auto cls = damage_from_code(fields[1]);
        if (!cls)
            throw std::runtime_error("predictions csv line " + std::to_string(line_no) +
                                     ": unknown class '" + fields[1] + "'");
        Detection d;
        d.image_id = fields[0];
        d.cls = *cls;
        d.box = {std::stod(fields[2]), std::stod(fields[3]), std::stod(fields[4]),
                 std::stod(fields[5])};
        d.score = std::stod(fields[6]);
        if (d.box.x_min >= d.box.x_max || d.box.y_min >= d.box.y_max)
            throw std::runtime_error("predictions csv line " + std::to_string(line_no) +
                                     ": degenerate box");
        out.push_back(std::move(d));
    }
    return out;
}

std::string write_predictions_csv(const std::vector<Detection>& dets) {
    std::ostringstream os;
    os << "image_id,class,x_min,y_min,x_max,y_max,score\n";
    os.setf(std::ios::fixed);
    os.precision(6);
    for (const auto& d : dets)
        os << d.image_id << ',' << damage_code(d.cls) << ',' << d.box.x_min << ',' << d.box.y_min
           << ',' << d.box.x_max << ',' << d.box.y_max << ',' << d.score << '\n';
    return os.str();
}

std::string report_json(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                        double iou_thr, double conf_thr) {
    nlohmann::json per_class = nlohmann::json::object();
    MapResult mr = map50(dets, gts, iou_thr);
    for (int c = 0; c < kNumClasses; ++c) {
        const auto cls = static_cast<DamageClass>(c);
        std::vector<Detection> cd;
        std::vector<GroundTruth> cg;
        for (const auto& d : dets)
            if (d.cls == cls) cd.push_back(d);
        for (const auto& g : gts)
            if (g.cls == cls) cg.push_back(g);
        if (cd.empty() && cg.empty()) continue;
        F1Result f = f1_at(cd, cg, iou_thr, conf_thr);
        nlohmann::json jc = {{"precision", f.precision}, {"recall", f.recall},
                             {"f1", f.f1},               {"tp", f.tp},
                             {"fp", f.fp},               {"fn", f.fn}};
        if (auto it = mr.per_class_ap.find(cls); it != mr.per_class_ap.end())
            jc["ap"] = it->second;
        per_class[damage_code(cls)] = jc;
    }
    F1Result overall = f1_at(dets, gts, iou_thr, conf_thr);
    nlohmann::json j = {{"iou_threshold", iou_thr},
                        {"confidence_threshold", conf_thr},
                        {"per_class", per_class},
                        {"overall",
                         {{"precision", overall.precision},
                          {"recall", overall.recall},
                          {"f1", overall.f1},
                          {"tp", overall.tp},
                          {"fp", overall.fp},
                          {"fn", overall.fn}}},
                        {"map50", mr.map}};
    return j.dump(2);
}

}  // namespace rdd::eval
