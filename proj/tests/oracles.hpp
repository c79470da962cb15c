#pragma once

// Independent reference implementations used only by tests. These stay
// loop-level and naive on purpose; they must not share code with the
// implementations they check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rdd/coord_attention.hpp"
#include "rdd/evalmetrics.hpp"
#include "rdd/tensor.hpp"

namespace oracle {

inline rdd::Matrix naive_matmul_bias(const rdd::Matrix& w, const rdd::Matrix& x,
                                     const std::vector<double>& bias) {
    rdd::Matrix out(w.rows, x.cols);
    for (int i = 0; i < w.rows; ++i)
        for (int j = 0; j < x.cols; ++j) {
            double s = bias.empty() ? 0.0 : bias[i];
            for (int k = 0; k < w.cols; ++k) s += w.at(i, k) * x.at(k, j);
            out.at(i, j) = s;
        }
    return out;
}

// Straight-line re-implementation of the coordinate-attention forward pass
// with explicit loops only.
inline rdd::Tensor ca_forward_loops(const rdd::Tensor& x, const rdd::ca::CAParams& p) {
    const int C = x.channels, H = x.height, W = x.width, M = p.c_mid;

    std::vector<std::vector<double>> zh(C, std::vector<double>(H, 0.0));
    std::vector<std::vector<double>> zw(C, std::vector<double>(W, 0.0));
    for (int c = 0; c < C; ++c) {
        for (int h = 0; h < H; ++h) {
            double s = 0.0;
            for (int i = 0; i < W; ++i) s += x.at(c, h, i);
            zh[c][h] = s / W;
        }
        for (int w = 0; w < W; ++w) {
            double s = 0.0;
            for (int j = 0; j < H; ++j) s += x.at(c, j, w);
            zw[c][w] = s / H;
        }
    }

    auto delta = [&](double t) {
        if (p.delta_kind == rdd::Activation::Sigmoid) return 1.0 / (1.0 + std::exp(-t));
        double c = t + 3.0;
        c = std::max(0.0, std::min(6.0, c));
        return t * c / 6.0;
    };
    auto sigmoid = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };

    // f = delta(F1([zh || zw]))
    std::vector<std::vector<double>> f(M, std::vector<double>(H + W, 0.0));
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < H + W; ++k) {
            double s = p.b_f1[m];
            for (int c = 0; c < C; ++c) {
                const double u = k < H ? zh[c][k] : zw[c][k - H];
                s += p.w_f1.at(m, c) * u;
            }
            f[m][k] = delta(s);
        }
    }

    std::vector<std::vector<double>> gh(C, std::vector<double>(H, 0.0));
    std::vector<std::vector<double>> gw(C, std::vector<double>(W, 0.0));
    for (int c = 0; c < C; ++c) {
        for (int h = 0; h < H; ++h) {
            double s = p.b_fh[c];
            for (int m = 0; m < M; ++m) s += p.w_fh.at(c, m) * f[m][h];
            gh[c][h] = sigmoid(s);
        }
        for (int w = 0; w < W; ++w) {
            double s = p.b_fw[c];
            for (int m = 0; m < M; ++m) s += p.w_fw.at(c, m) * f[m][H + w];
            gw[c][w] = sigmoid(s);
        }
    }

    rdd::Tensor y(C, H, W);
    for (int c = 0; c < C; ++c)
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j) y.at(c, i, j) = x.at(c, i, j) * gh[c][i] * gw[c][j];
    return y;
}

// Literal enumeration of the greedy matching protocol for tiny instances.
struct GreedyOutcome {
    int tp = 0, fp = 0;
};

inline GreedyOutcome greedy_match_literal(const std::vector<rdd::eval::Detection>& dets,
                                          const std::vector<rdd::eval::GroundTruth>& gts,
                                          double thr) {
    std::vector<size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });
    std::vector<bool> used(gts.size(), false);
    GreedyOutcome out;
    for (size_t k : order) {
        int best = -1;
        double best_iou = -1.0;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (used[g]) continue;
            if (dets[k].image_id != gts[g].image_id || dets[k].cls != gts[g].cls) continue;
            const double v = rdd::iou(dets[k].box, gts[g].box);
            if (v >= thr && v > best_iou) {
                best_iou = v;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0) {
            used[best] = true;
            ++out.tp;
        } else {
            ++out.fp;
        }
    }
    return out;
}

inline rdd::eval::F1Result f1_brute(const std::vector<rdd::eval::Detection>& dets,
                                    const std::vector<rdd::eval::GroundTruth>& gts,
                                    double iou_thr, double conf_thr) {
    std::vector<rdd::eval::Detection> kept;
    for (const auto& d : dets)
        if (d.score >= conf_thr) kept.push_back(d);
    GreedyOutcome m = greedy_match_literal(kept, gts, iou_thr);
    rdd::eval::F1Result r;
    r.tp = m.tp;
    r.fp = m.fp;
    r.fn = static_cast<int>(gts.size()) - m.tp;
    r.precision = (r.tp + r.fp) > 0 ? double(r.tp) / (r.tp + r.fp) : 0.0;
    r.recall = !gts.empty() ? double(r.tp) / gts.size() : 0.0;
    r.f1 = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall)
                                        : 0.0;
    return r;
}

// AP by brute-force threshold enumeration: precision/recall at every distinct
// score cut, then exact area under the interpolated envelope.
inline double ap_brute(const std::vector<rdd::eval::Detection>& dets,
                       const std::vector<rdd::eval::GroundTruth>& gts, double iou_thr) {
    if (gts.empty()) return 0.0;
    std::vector<double> cuts;
    for (const auto& d : dets) cuts.push_back(d.score);
    std::sort(cuts.rbegin(), cuts.rend());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<double> precs, recs;
    for (double cut : cuts) {
        auto f = f1_brute(dets, gts, iou_thr, cut);
        precs.push_back(f.precision);
        recs.push_back(f.recall);
    }
    double ap = 0.0, prev_r = 0.0;
    for (size_t k = 0; k < cuts.size(); ++k) {
        if (recs[k] <= prev_r) continue;
        double env = 0.0;
        for (size_t j = k; j < cuts.size(); ++j) env = std::max(env, precs[j]);
        ap += (recs[k] - prev_r) * env;
        prev_r = recs[k];
    }
    return ap;
}

inline double map_brute(const std::vector<rdd::eval::Detection>& dets,
                        const std::vector<rdd::eval::GroundTruth>& gts, double iou_thr) {
    std::vector<int> classes;
    for (const auto& g : gts) {
        const int c = static_cast<int>(g.cls);
        if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
    }
    if (classes.empty()) return 0.0;
    double sum = 0.0;
    for (int c : classes) {
        std::vector<rdd::eval::Detection> cd;
        std::vector<rdd::eval::GroundTruth> cg;
        for (const auto& d : dets)
            if (static_cast<int>(d.cls) == c) cd.push_back(d);
        for (const auto& g : gts)
            if (static_cast<int>(g.cls) == c) cg.push_back(g);
        sum += ap_brute(cd, cg, iou_thr);
    }
    return sum / classes.size();
}

}  // namespace oracle
