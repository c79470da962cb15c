// rdd: road-damage dataset + evaluation toolkit CLI.
// JSON result on stdout, human logs on stderr.
// Exit codes: 0 ok, 1 domain failure, 2 usage error.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "rdd/augment.hpp"
#include "rdd/collector.hpp"
#include "rdd/coord_attention.hpp"
#include "rdd/dataset.hpp"
#include "rdd/ensemble.hpp"
#include "rdd/evalmetrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw DomainError("cannot open " + p.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw DomainError("cannot write " + p.string());
    os << text;
}

rdd::img::Image load_image(const fs::path& p) {
    cv::Mat bgr = cv::imread(p.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw DomainError("cannot decode image " + p.string());
    rdd::img::Image out(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        for (int x = 0; x < bgr.cols; ++x) {
            const cv::Vec3b px = bgr.at<cv::Vec3b>(y, x);
            uint8_t* o = out.px(x, y);
            o[0] = px[2];
            o[1] = px[1];
            o[2] = px[0];
        }
    }
    return out;
}

void save_image(const rdd::img::Image& im, const fs::path& p) {
    cv::Mat bgr(im.height, im.width, CV_8UC3);
    for (int y = 0; y < im.height; ++y) {
        for (int x = 0; x < im.width; ++x) {
            const uint8_t* s = im.px(x, y);
            bgr.at<cv::Vec3b>(y, x) = {s[2], s[1], s[0]};
        }
    }
    if (!cv::imwrite(p.string(), bgr)) throw DomainError("cannot write image " + p.string());
}

void draw_box(rdd::img::Image& im, const rdd::PixelBox& b, std::array<uint8_t, 3> color) {
    const int x0 = std::clamp(static_cast<int>(b.x_min), 0, im.width - 1);
    const int x1 = std::clamp(static_cast<int>(b.x_max), 0, im.width - 1);
    const int y0 = std::clamp(static_cast<int>(b.y_min), 0, im.height - 1);
    const int y1 = std::clamp(static_cast<int>(b.y_max), 0, im.height - 1);
    for (int x = x0; x <= x1; ++x) {
        std::copy(color.begin(), color.end(), im.px(x, y0));
        std::copy(color.begin(), color.end(), im.px(x, y1));
    }
    for (int y = y0; y <= y1; ++y) {
        std::copy(color.begin(), color.end(), im.px(x0, y));
        std::copy(color.begin(), color.end(), im.px(x1, y));
    }
}

std::array<uint8_t, 3> class_color(rdd::DamageClass c) {
    switch (c) {
        case rdd::DamageClass::D00: return {255, 64, 64};
        case rdd::DamageClass::D10: return {64, 255, 64};
        case rdd::DamageClass::D20: return {64, 64, 255};
        case rdd::DamageClass::D40: return {255, 255, 64};
    }
    return {255, 255, 255};
}

// ---------------------------------------------------------------------------

int cmd_stats(const std::string& root, const std::string& csv_out) {
    auto records = rdd::dataset::load_records(root);
    auto s = rdd::dataset::stats(records);
    if (!csv_out.empty()) write_file(csv_out, rdd::dataset::stats_to_csv(s));
    std::cout << rdd::dataset::stats_to_json(s) << std::endl;
    return 0;
}

int cmd_crop_norway(const std::string& in_dir, const std::string& out_dir, int region,
                    int jobs) {
    const fs::path in(in_dir), out(out_dir);
    if (!fs::is_directory(in / "labels")) throw DomainError("no labels/ under " + in_dir);
    fs::create_directories(out / "labels");
    const bool have_images = fs::is_directory(in / "images");
    if (have_images) fs::create_directories(out / "images");

    std::vector<fs::path> label_files;
    for (const auto& e : fs::directory_iterator(in / "labels"))
        if (e.path().extension() == ".txt") label_files.push_back(e.path());
    std::sort(label_files.begin(), label_files.end());

    struct PerFile {
        rdd::dataset::CropCounts counts;
    };
    std::vector<PerFile> results(label_files.size());

    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const auto& lf = label_files[i];
            rdd::dataset::ImageRecord rec;
            rec.id = lf.stem().string();
            rec.folder = in.filename().string();
            rec.annotations = rdd::dataset::parse_label_file(read_file(lf));

            std::optional<rdd::img::Image> image;
            fs::path img_path;
            if (have_images) {
                for (const char* ext : {".jpg", ".png", ".jpeg"}) {
                    fs::path p = in / "images" / (rec.id + ext);
                    if (fs::exists(p)) {
                        img_path = p;
                        break;
                    }
                }
            }
            if (!img_path.empty()) {
                image = load_image(img_path);
                rec.width = image->width;
                rec.height = image->height;
            } else {
                // label-only mode assumes the folder's canonical size
                rec.width = 4040;
                rec.height = 2041;
            }

            auto res = rdd::dataset::norway_crop(rec, image ? &*image : nullptr, region);
            results[i].counts = res.counts;

            write_file(out / "labels" / (rec.id + ".txt"),
                       rdd::dataset::write_label_file(res.record.annotations));
            if (res.image) save_image(*res.image, out / "images" / (rec.id + ".png"));
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1 || label_files.size() < 2) {
        work(0, label_files.size());
    } else {
        std::vector<std::future<void>> futs;
        const size_t chunk = (label_files.size() + jobs - 1) / jobs;
        for (size_t b = 0; b < label_files.size(); b += chunk)
            futs.push_back(std::async(std::launch::async, work, b,
                                      std::min(b + chunk, label_files.size())));
        for (auto& f : futs) f.get();
    }

    rdd::dataset::CropCounts total;
    for (const auto& r : results) {
        total.kept += r.counts.kept;
        total.clipped += r.counts.clipped;
        total.dropped += r.counts.dropped;
    }
    std::cout << json{{"images", label_files.size()},
                      {"kept", total.kept},
                      {"clipped", total.clipped},
                      {"dropped", total.dropped}}
                     .dump(2)
              << std::endl;
    return 0;
}

int cmd_split(const std::string& root, const std::string& target, uint64_t seed,
              const std::string& out_dir) {
    auto records = rdd::dataset::load_records(root);
    auto [usable, unusable] = rdd::dataset::filter_usable(records);
    std::map<std::string, std::vector<std::string>> folders;
    for (const auto& r : usable) folders[r.folder].push_back(r.id);

    rdd::dataset::SplitPlan plan;
    try {
        plan = rdd::dataset::split_train_val(folders, target, seed);
    } catch (const std::invalid_argument& e) {
        throw DomainError(e.what());
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ostringstream tr, va;
        for (const auto& id : plan.train_ids) tr << id << '\n';
        for (const auto& id : plan.val_ids) va << id << '\n';
        write_file(fs::path(out_dir) / "train.txt", tr.str());
        write_file(fs::path(out_dir) / "val.txt", va.str());
    }

    std::cout << json{{"target", plan.target_folder},
                      {"seed", plan.seed},
                      {"val_count", plan.val_ids.size()},
                      {"train_count", plan.train_ids.size()},
                      {"val_ids", plan.val_ids}}
                     .dump(2)
              << std::endl;
    return 0;
}

int cmd_augment(const std::string& root, const std::string& config_path, uint64_t seed,
                int out_size, int grid, const std::string& out_png) {
    rdd::aug::AugmentConfig cfg = config_path.empty()
                                      ? rdd::aug::AugmentConfig::experimented()
                                      : rdd::aug::parse_config(read_file(config_path));

    auto records = rdd::dataset::load_records(root);
    auto [usable, unusable] = rdd::dataset::filter_usable(records);
    if (usable.empty()) throw DomainError("no usable images under " + root);

    rdd::Rng rng(seed);
    auto source = [&]() -> rdd::aug::Sample {
        const auto& rec = usable[rng.bounded(usable.size())];
        fs::path img_path;
        for (const char* ext : {".jpg", ".png", ".jpeg"}) {
            fs::path p = fs::path(root) / rec.folder / "images" / (rec.id + ext);
            if (fs::exists(p)) {
                img_path = p;
                break;
            }
        }
        if (img_path.empty()) throw DomainError("no image file for record " + rec.id);
        rdd::aug::Sample s;
        s.id = rec.id;
        s.image = load_image(img_path);
        for (const auto& a : rec.annotations)
            s.boxes.push_back({a.cls, rdd::to_pixels(a.box, s.image.width, s.image.height)});
        return s;
    };

    // grid of independently augmented samples with box overlays
    rdd::img::Image canvas(grid * out_size, grid * out_size, rdd::img::kGrayFill);
    json prov = json::array();
    for (int gy = 0; gy < grid; ++gy) {
        for (int gx = 0; gx < grid; ++gx) {
            auto s = rdd::aug::pipeline(cfg, source, out_size, rng);
            for (const auto& lb : s.boxes) draw_box(s.image, lb.box, class_color(lb.cls));
            for (int y = 0; y < out_size; ++y)
                std::memcpy(canvas.px(gx * out_size, gy * out_size + y), s.image.px(0, y),
                            3 * static_cast<size_t>(out_size));
            prov.push_back(json::parse(rdd::aug::provenance_json(s)));
        }
    }
    save_image(canvas, out_png);
    const std::string sidecar = out_png + ".provenance.json";
    write_file(sidecar, prov.dump(2) + "\n");

    std::cout << json{{"out", out_png}, {"provenance", sidecar}, {"samples", grid * grid}}.dump(2)
              << std::endl;
    return 0;
}

int cmd_eval(const std::string& gt_root, const std::string& pred_csv, double iou_thr,
             double conf_thr) {
    auto records = rdd::dataset::load_records(gt_root);
    std::vector<rdd::eval::GroundTruth> gts;
    for (const auto& r : records)
        for (const auto& a : r.annotations)
            gts.push_back({r.id, a.cls, rdd::to_pixels(a.box, r.width, r.height)});

    auto dets = rdd::eval::read_predictions_csv(read_file(pred_csv));
    std::cout << rdd::eval::report_json(dets, gts, iou_thr, conf_thr) << std::endl;
    return 0;
}

int cmd_ensemble(const std::vector<std::string>& pred_csvs, const std::string& config_path,
                 const std::string& out_csv) {
    rdd::ensemble::FusionConfig cfg;
    if (!config_path.empty()) cfg = rdd::ensemble::parse_fusion_config(read_file(config_path));

    std::vector<rdd::ensemble::DetectionSource> sources;
    std::set<std::string> ids;
    for (const auto& path : pred_csvs) {
        auto dets = rdd::eval::read_predictions_csv(read_file(path));
        auto by_image = std::make_shared<std::map<std::string, std::vector<rdd::eval::Detection>>>();
        for (auto& d : dets) {
            ids.insert(d.image_id);
            (*by_image)[d.image_id].push_back(std::move(d));
        }
        rdd::ensemble::DetectionSource src;
        src.name = fs::path(path).stem().string();
        src.provider = [by_image](const std::string& id) {
            auto it = by_image->find(id);
            return it == by_image->end() ? std::vector<rdd::eval::Detection>{} : it->second;
        };
        sources.push_back(std::move(src));
    }

    auto [fused, prov] = rdd::ensemble::ensemble_run(
        sources, std::vector<std::string>(ids.begin(), ids.end()), cfg);
    write_file(out_csv, rdd::eval::write_predictions_csv(fused));

    json per_source = json::object();
    for (const auto& [name, n] : prov.per_source_counts) per_source[name] = n;
    std::cout << json{{"out", out_csv}, {"fused", fused.size()}, {"sources", per_source}}.dump(2)
              << std::endl;
    return 0;
}

int cmd_ca_check(uint64_t seed, int channels, int reduction, int height, int width) {
    rdd::Rng rng(seed);
    auto p = rdd::ca::init_params(channels, reduction, seed);
    rdd::Tensor x(channels, height, width);
    for (double& v : x.data) v = rng.uniform(-1.0, 1.0);

    auto out = rdd::ca::forward(x, p);
    const bool shape_ok = out.y.same_dims(x) && out.g_h.rows == channels &&
                          out.g_h.cols == height && out.g_w.cols == width &&
                          out.f.rows == p.c_mid && out.f.cols == height + width;

    // loss = sum y^2; upstream = 2y
    rdd::Tensor upstream = out.y;
    for (double& v : upstream.data) v *= 2.0;
    auto grads = rdd::ca::backward(x, p, upstream);

    auto loss_of_x = [&](std::span<const double> flat) {
        rdd::Tensor xt = x;
        std::copy(flat.begin(), flat.end(), xt.data.begin());
        auto o = rdd::ca::forward(xt, p);
        double s = 0.0;
        for (double v : o.y.data) s += v * v;
        return s;
    };
    auto rep_x = rdd::grad_check(loss_of_x, grads.grad_x.data, x.data, 1e-5, 1e-4);

    auto flat_params = rdd::ca::flatten(p);
    auto loss_of_params = [&](std::span<const double> flat) {
        rdd::ca::CAParams pt = p;
        rdd::ca::unflatten(pt, flat);
        auto o = rdd::ca::forward(x, pt);
        double s = 0.0;
        for (double v : o.y.data) s += v * v;
        return s;
    };
    auto rep_p = rdd::grad_check(loss_of_params, rdd::ca::flatten_grads(grads), flat_params,
                                 1e-5, 1e-4);

    const double max_rel = std::max(rep_x.max_rel_err, rep_p.max_rel_err);
    const bool pass = shape_ok && rep_x.pass && rep_p.pass;
    std::cout << json{{"pass", pass},
                      {"shape_ok", shape_ok},
                      {"max_rel_err", max_rel},
                      {"channels", channels},
                      {"reduction", reduction}}
                     .dump(2)
              << std::endl;
    return pass ? 0 : 1;
}

int cmd_collect(const std::string& route_path, double spacing, const std::string& headings_csv,
                const std::string& endpoint, const std::string& cache_dir, double rate,
                int retries) {
    const char* key_env = std::getenv("RDD_API_KEY");
    const std::string api_key = key_env ? key_env : "";
    if (api_key.empty()) throw DomainError("RDD_API_KEY environment variable is not set");

    std::vector<double> headings;
    std::stringstream hs(headings_csv);
    std::string tok;
    while (std::getline(hs, tok, ',')) headings.push_back(std::stod(tok));
    if (headings.empty()) throw DomainError("no headings given");

    auto polyline = rdd::collector::read_route_json(read_file(route_path));
    std::vector<rdd::collector::ViewRequest> requests;
    try {
        requests = rdd::collector::sample_route(polyline, spacing, headings);
    } catch (const std::invalid_argument& e) {
        throw DomainError(e.what());
    }
    for (auto& r : requests) r.api_key = api_key;

    // endpoint: http://host[:port]/path
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) throw DomainError("endpoint must include scheme");
    const auto path_start = endpoint.find('/', scheme_end + 3);
    const std::string host = endpoint.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

    httplib::Client client(host);
    client.set_connection_timeout(10);
    auto transport = [&](const std::string& url) {
        const auto q = url.find('?');
        auto res = client.Get(url.substr(url.find(path)));
        (void)q;
        rdd::collector::HttpResponse resp;
        if (!res) return resp;  // status 0: transport failure
        resp.status = res->status;
        resp.body.assign(res->body.begin(), res->body.end());
        if (res->has_header("X-Capture-Date"))
            resp.capture_date = res->get_header_value("X-Capture-Date");
        return resp;
    };

    rdd::collector::FetchPolicy policy;
    policy.max_requests_per_second = rate;
    policy.max_retries = retries;
    policy.cache_dir = cache_dir;
    auto clock = rdd::collector::system_clock();
    rdd::collector::Fetcher fetcher(policy, transport, *clock);

    int fetched = 0, cached = 0, failed = 0;
    for (const auto& req : requests) {
        auto rec = fetcher.fetch(req, path);
        switch (rec.status) {
            case rdd::collector::FetchStatus::Fetched: ++fetched; break;
            case rdd::collector::FetchStatus::Cached: ++cached; break;
            case rdd::collector::FetchStatus::Failed:
                ++failed;
                std::cerr << "fetch failed: " << rec.error << '\n';
                break;
        }
    }
    std::cout << json{{"requested", requests.size()},
                      {"fetched", fetched},
                      {"cached", cached},
                      {"failed", failed}}
                     .dump(2)
              << std::endl;
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"road damage detection toolkit"};
    app.require_subcommand(1);
    int jobs = 1;
    app.add_option("--jobs", jobs, "max parallel workers")->capture_default_str();

    // stats
    auto* stats = app.add_subcommand("stats", "per-folder per-class annotation counts");
    std::string stats_root, stats_csv;
    stats->add_option("--root", stats_root, "dataset root")->required();
    stats->add_option("--csv", stats_csv, "also write a CSV report");

    // crop-norway
    auto* crop = app.add_subcommand("crop-norway", "lower-left region crop (Norway -> Norway1)");
    std::string crop_in, crop_out;
    int crop_region = rdd::dataset::kNorwayRegionSide;
    crop->add_option("--in", crop_in, "input folder (labels/ [+ images/])")->required();
    crop->add_option("--out", crop_out, "output folder")->required();
    crop->add_option("--region", crop_region, "crop side in px")->capture_default_str();

    // split
    auto* split = app.add_subcommand("split", "seeded 90/10 train/val split");
    std::string split_root, split_target, split_out;
    uint64_t split_seed = 0;
    split->add_option("--root", split_root, "dataset root")->required();
    split->add_option("--target", split_target, "target folder")->required();
    split->add_option("--seed", split_seed, "shuffle seed")->capture_default_str();
    split->add_option("--out", split_out, "write train.txt/val.txt here");

    // augment
    auto* augment = app.add_subcommand("augment", "augmentation preview grid (PNG + provenance)");
    std::string aug_root, aug_config, aug_out = "preview.png";
    uint64_t aug_seed = 0;
    int aug_size = 640, aug_grid = 2;
    augment->add_option("--root", aug_root, "dataset root")->required();
    augment->add_option("--config", aug_config, "augmentation key-value config");
    augment->add_option("--seed", aug_seed, "rng seed")->capture_default_str();
    augment->add_option("--size", aug_size, "output sample size")->capture_default_str();
    augment->add_option("--grid", aug_grid, "grid side (grid x grid samples)")->capture_default_str();
    augment->add_option("--out", aug_out, "output PNG")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    std::string eval_gt, eval_pred;
    double eval_iou = 0.5, eval_conf = 0.25;
    eval->add_option("--gt", eval_gt, "ground-truth dataset root")->required();
    eval->add_option("--pred", eval_pred, "predictions CSV")->required();
    eval->add_option("--iou", eval_iou, "IoU threshold")->capture_default_str();
    eval->add_option("--conf", eval_conf, "confidence threshold for F1")->capture_default_str();

    // ensemble
    auto* ens = app.add_subcommand("ensemble", "fuse prediction CSVs (WBF or NMS)");
    std::vector<std::string> ens_preds;
    std::string ens_config, ens_out = "fused.csv";
    ens->add_option("--pred", ens_preds, "prediction CSVs (repeatable)")->required();
    ens->add_option("--config", ens_config, "fusion key-value config");
    ens->add_option("--out", ens_out, "fused output CSV")->capture_default_str();

    // ca-check
    auto* ca = app.add_subcommand("ca-check", "coordinate-attention shape + gradient self-test");
    uint64_t ca_seed = 0;
    int ca_c = 8, ca_r = 2, ca_h = 5, ca_w = 7;
    ca->add_option("--seed", ca_seed, "rng seed")->capture_default_str();
    ca->add_option("--channels", ca_c, "input channels")->capture_default_str();
    ca->add_option("--reduction", ca_r, "reduction ratio")->capture_default_str();
    ca->add_option("--height", ca_h, "input height")->capture_default_str();
    ca->add_option("--width", ca_w, "input width")->capture_default_str();

    // collect
    auto* collect = app.add_subcommand("collect", "fetch street-view images along a route");
    std::string col_route, col_headings = "90,270", col_endpoint, col_cache = "cache";
    double col_spacing = 10.0, col_rate = 5.0;
    int col_retries = 3;
    collect->add_option("--route", col_route, "route JSON ([[lat,lng],...])")->required();
    collect->add_option("--spacing", col_spacing, "sample spacing in meters")->capture_default_str();
    collect->add_option("--headings", col_headings, "comma-separated headings")->capture_default_str();
    collect->add_option("--endpoint", col_endpoint, "endpoint base URL")->required();
    collect->add_option("--cache", col_cache, "cache directory")->capture_default_str();
    collect->add_option("--rate", col_rate, "max requests per second")->capture_default_str();
    collect->add_option("--retries", col_retries, "max retries on 5xx/timeout")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n' << app.help() << '\n';
        return 2;
    }

    try {
        if (*stats) return cmd_stats(stats_root, stats_csv);
        if (*crop) return cmd_crop_norway(crop_in, crop_out, crop_region, jobs);
        if (*split) return cmd_split(split_root, split_target, split_seed, split_out);
        if (*augment)
            return cmd_augment(aug_root, aug_config, aug_seed, aug_size, aug_grid, aug_out);
        if (*eval) return cmd_eval(eval_gt, eval_pred, eval_iou, eval_conf);
        if (*ens) return cmd_ensemble(ens_preds, ens_config, ens_out);
        if (*ca) return cmd_ca_check(ca_seed, ca_c, ca_r, ca_h, ca_w);
        if (*collect)
            return cmd_collect(col_route, col_spacing, col_headings, col_endpoint, col_cache,
                               col_rate, col_retries);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        std::cout << json{{"error", e.what()}}.dump(2) << std::endl;
        return 1;
    }
    return 2;
}
