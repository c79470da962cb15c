#include "rdd/ensemble.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rdd::ensemble {

namespace {

bool box_less(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.box.x_min != b.box.x_min) return a.box.x_min < b.box.x_min;
    if (a.box.y_min != b.box.y_min) return a.box.y_min < b.box.y_min;
    if (a.box.x_max != b.box.x_max) return a.box.x_max < b.box.x_max;
    return a.box.y_max < b.box.y_max;
}

}  // namespace

FusionConfig parse_fusion_config(const std::string& text) {
    FusionConfig cfg;
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
            throw std::runtime_error("fusion config line " + std::to_string(line_no) +
                                     ": missing value for '" + key + "'");
        if (key == "iou_thr") {
            cfg.iou_thr = std::stod(value);
        } else if (key == "mode") {
            if (value == "wbf")
                cfg.mode = FusionMode::Wbf;
            else if (value == "nms")
                cfg.mode = FusionMode::Nms;
            else
                throw std::runtime_error("fusion config: unknown mode '" + value + "'");
        } else if (key == "participation_scaling") {
            cfg.participation_scaling = value == "1" || value == "true" || value == "on";
        } else if (key.starts_with("weight.")) {
            cfg.source_weights[key.substr(7)] = std::stod(value);
        } else {
            throw std::runtime_error("fusion config line " + std::to_string(line_no) +
                                     ": unknown key '" + key + "'");
        }
    }
    if (cfg.iou_thr <= 0.0 || cfg.iou_thr >= 1.0)
        throw std::runtime_error("fusion config: iou_thr must be in (0,1)");
    return cfg;
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_thr) {
    if (iou_thr <= 0.0 || iou_thr >= 1.0)
        throw std::invalid_argument("nms: iou_thr must be in (0,1)");
    std::vector<Detection> sorted = dets;
    std::sort(sorted.begin(), sorted.end(), box_less);
    std::vector<Detection> kept;
    std::vector<bool> suppressed(sorted.size(), false);
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (suppressed[i]) continue;
        kept.push_back(sorted[i]);
        for (size_t j = i + 1; j < sorted.size(); ++j) {
            if (suppressed[j]) continue;
            if (sorted[j].image_id == sorted[i].image_id && sorted[j].cls == sorted[i].cls &&
                iou(sorted[j].box, sorted[i].box) >= iou_thr)
                suppressed[j] = true;
        }
    }
    return kept;
}

std::vector<Detection> weighted_box_fusion(const std::vector<std::vector<Detection>>& per_source,
                                           const std::vector<double>& weights, double iou_thr,
                                           bool participation_scaling) {
    if (per_source.size() != weights.size())
        throw std::invalid_argument("weighted_box_fusion: sources/weights length mismatch");
    for (double w : weights)
        if (w <= 0.0) throw std::invalid_argument("weighted_box_fusion: weights must be > 0");

    struct Tagged {
        Detection det;
        double src_weight;
        size_t src_index;
    };
    std::vector<Tagged> all;
    for (size_t s = 0; s < per_source.size(); ++s)
        for (const auto& d : per_source[s]) all.push_back({d, weights[s], s});

    // canonical order makes clustering independent of source/detection order
    std::sort(all.begin(), all.end(),
              [](const Tagged& a, const Tagged& b) { return box_less(a.det, b.det); });

    struct Cluster {
        std::string image_id;
        DamageClass cls;
        PixelBox rep;  // running corner-weighted average
        double corner_w = 0.0;
        double wx0 = 0, wy0 = 0, wx1 = 0, wy1 = 0;
        double score_w = 0.0, weight_sum = 0.0;
        std::set<size_t> sources;
    };
    std::vector<Cluster> clusters;

    for (const auto& t : all) {
        Cluster* home = nullptr;
        for (auto& c : clusters) {
            if (c.image_id == t.det.image_id && c.cls == t.det.cls &&
                iou(t.det.box, c.rep) >= iou_thr) {
                home = &c;
                break;
            }
        }
        if (!home) {
            clusters.emplace_back();
            home = &clusters.back();
            home->image_id = t.det.image_id;
            home->cls = t.det.cls;
        }
        const double cw = t.det.score * t.src_weight;
        home->wx0 += cw * t.det.box.x_min;
        home->wy0 += cw * t.det.box.y_min;
        home->wx1 += cw * t.det.box.x_max;
        home->wy1 += cw * t.det.box.y_max;
        home->corner_w += cw;
        home->score_w += t.det.score * t.src_weight;
        home->weight_sum += t.src_weight;
        home->sources.insert(t.src_index);
        home->rep = {home->wx0 / home->corner_w, home->wy0 / home->corner_w,
                     home->wx1 / home->corner_w, home->wy1 / home->corner_w};
    }

    const double n_sources = static_cast<double>(per_source.size());
    std::vector<Detection> fused;
    for (const auto& c : clusters) {
        Detection d;
        d.image_id = c.image_id;
        d.cls = c.cls;
        d.box = c.rep;
        d.score = c.score_w / c.weight_sum;
        if (participation_scaling)
            d.score *= static_cast<double>(c.sources.size()) / n_sources;
        fused.push_back(std::move(d));
    }
    std::sort(fused.begin(), fused.end(), box_less);
    return fused;
}

PixelBox tta_forward_box(const TTAVariant& v, const PixelBox& b, int image_width) {
    switch (v.kind) {
        case TTAVariant::Kind::Identity:
            return b;
        case TTAVariant::Kind::HorizontalFlip:
            return {image_width - b.x_max, b.y_min, image_width - b.x_min, b.y_max};
        case TTAVariant::Kind::Scale:
            return {b.x_min * v.scale, b.y_min * v.scale, b.x_max * v.scale, b.y_max * v.scale};
    }
    return b;
}

PixelBox tta_inverse_box(const TTAVariant& v, const PixelBox& b, int image_width) {
    switch (v.kind) {
        case TTAVariant::Kind::Identity:
            return b;
        case TTAVariant::Kind::HorizontalFlip:
            // flip is an involution; the transformed frame has the same width
            return {image_width - b.x_max, b.y_min, image_width - b.x_min, b.y_max};
        case TTAVariant::Kind::Scale:
            return {b.x_min / v.scale, b.y_min / v.scale, b.x_max / v.scale, b.y_max / v.scale};
    }
    return b;
}

std::vector<Detection> tta_infer(const VariantProvider& provider, const std::string& image_id,
                                 int image_width, const std::vector<TTAVariant>& variants,
                                 const FusionConfig& cfg) {
    const bool has_identity =
        std::any_of(variants.begin(), variants.end(),
                    [](const TTAVariant& v) { return v.kind == TTAVariant::Kind::Identity; });
    if (!has_identity)
        throw std::invalid_argument("tta_infer: variants must include the identity");

    if (variants.size() == 1) return provider(image_id, variants.front());

    std::vector<std::vector<Detection>> per_variant;
    for (const auto& v : variants) {
        std::vector<Detection> dets = provider(image_id, v);
        for (auto& d : dets) d.box = tta_inverse_box(v, d.box, image_width);
        per_variant.push_back(std::move(dets));
    }
    std::vector<double> equal(per_variant.size(), 1.0);
    return weighted_box_fusion(per_variant, equal, cfg.iou_thr, cfg.participation_scaling);
}

std::pair<std::vector<Detection>, EnsembleProvenance> ensemble_run(
    const std::vector<DetectionSource>& sources, const std::vector<std::string>& image_ids,
    const FusionConfig& cfg) {
    if (sources.empty()) throw std::invalid_argument("ensemble_run: need at least one source");

    EnsembleProvenance prov;
    std::vector<double> weights;
    for (const auto& s : sources) {
        auto it = cfg.source_weights.find(s.name);
        double w = it != cfg.source_weights.end() ? it->second : s.weight;
        if (w <= 0.0) throw std::invalid_argument("ensemble_run: weight must be > 0 for " + s.name);
        weights.push_back(w);
        prov.per_source_counts[s.name] = 0;
    }

    std::vector<Detection> fused_all;
    for (const auto& id : image_ids) {
        std::vector<std::vector<Detection>> per_source;
        for (size_t s = 0; s < sources.size(); ++s) {
            std::vector<Detection> dets = sources[s].provider(id);
            prov.per_source_counts[sources[s].name] += static_cast<int>(dets.size());
            if (dets.empty()) {
                auto& miss = prov.missing_sources;
                const std::string tag = sources[s].name + ":" + id;
                if (std::find(miss.begin(), miss.end(), tag) == miss.end()) miss.push_back(tag);
            }
            per_source.push_back(std::move(dets));
        }
        std::vector<Detection> fused;
        if (cfg.mode == FusionMode::Wbf) {
            fused = weighted_box_fusion(per_source, weights, cfg.iou_thr,
                                        cfg.participation_scaling);
        } else {
            std::vector<Detection> merged;
            for (auto& ds : per_source)
                merged.insert(merged.end(), ds.begin(), ds.end());
            fused = nms(merged, cfg.iou_thr);
        }
        fused_all.insert(fused_all.end(), fused.begin(), fused.end());
    }
    return {std::move(fused_all), std::move(prov)};
}

}  // namespace rdd::ensemble
