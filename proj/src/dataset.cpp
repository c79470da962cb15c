#include "rdd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rdd/numeric.hpp"

namespace rdd::dataset {

namespace {

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e && std::isfinite(out);
}

}  // namespace

std::vector<Annotation> parse_label_file(const std::string& text) {
    std::vector<Annotation> out;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::vector<std::string> fields;
        std::string tok;
        while (ls >> tok) fields.push_back(tok);
        if (fields.size() != 5)
            throw LabelParseError(line_no, "expected 5 fields, got " +
                                               std::to_string(fields.size()));
        int cls_idx = -1;
        {
            auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(),
                                           cls_idx);
            if (ec != std::errc{} || p != fields[0].data() + fields[0].size())
                throw LabelParseError(line_no, "bad class index '" + fields[0] + "'");
        }
        const auto cls = damage_from_index(cls_idx);
        if (!cls)
            throw LabelParseError(line_no, "class index " + std::to_string(cls_idx) +
                                               " outside the four damage classes");
        NormBox b;
        double* vals[4] = {&b.cx, &b.cy, &b.w, &b.h};
        for (int i = 0; i < 4; ++i)
            if (!parse_double(fields[i + 1], *vals[i]))
                throw LabelParseError(line_no, "bad coordinate '" + fields[i + 1] + "'");
        if (!norm_box_valid(b))
            throw LabelParseError(line_no, "box outside the normalized unit square");
        out.push_back({*cls, b});
    }
    return out;
}

std::string write_label_file(const std::vector<Annotation>& anns) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    for (const auto& a : anns)
        os << static_cast<int>(a.cls) << ' ' << a.box.cx << ' ' << a.box.cy << ' ' << a.box.w
           << ' ' << a.box.h << '\n';
    return os.str();
}

std::pair<std::vector<ImageRecord>, std::vector<ImageRecord>> filter_usable(
    const std::vector<ImageRecord>& records) {
    std::pair<std::vector<ImageRecord>, std::vector<ImageRecord>> out;
    for (const auto& r : records)
        (r.annotations.empty() ? out.second : out.first).push_back(r);
    return out;
}

CropResult norway_crop(const ImageRecord& rec, const img::Image* image, int region_side) {
    if (rec.width < region_side || rec.height < region_side)
        throw BoxError("norway_crop: image " + rec.id + " (" + std::to_string(rec.width) + "x" +
                       std::to_string(rec.height) + ") smaller than region " +
                       std::to_string(region_side));
    const double y_off = static_cast<double>(rec.height - region_side);

    CropResult res;
    res.record.id = rec.id;
    res.record.folder = rec.folder;
    res.record.width = region_side;
    res.record.height = region_side;

    for (const auto& a : rec.annotations) {
        PixelBox p = to_pixels(a.box, rec.width, rec.height);
        PixelBox clipped{std::max(p.x_min, 0.0), std::max(p.y_min, y_off),
                         std::min(p.x_max, static_cast<double>(region_side)),
                         std::min(p.y_max, static_cast<double>(rec.height))};
        if (clipped.x_max - clipped.x_min < 1.0 || clipped.y_max - clipped.y_min < 1.0) {
            ++res.counts.dropped;
            continue;
        }
        const bool was_clipped = clipped.x_min != p.x_min || clipped.y_min != p.y_min ||
                                 clipped.x_max != p.x_max || clipped.y_max != p.y_max;
        clipped.y_min -= y_off;
        clipped.y_max -= y_off;
        res.record.annotations.push_back(
            {a.cls, to_normalized(clipped, region_side, region_side)});
        ++(was_clipped ? res.counts.clipped : res.counts.kept);
    }

    if (image) {
        if (image->width != rec.width || image->height != rec.height)
            throw BoxError("norway_crop: image dims disagree with record " + rec.id);
        res.image = img::crop(*image, 0, rec.height - region_side, region_side, region_side);
    }
    return res;
}

SplitPlan split_train_val(const std::map<std::string, std::vector<std::string>>& folders,
                          const std::string& target, uint64_t seed) {
    auto it = folders.find(target);
    if (it == folders.end())
        throw std::invalid_argument("split_train_val: unknown target folder '" + target + "'");
    if (target == kChinaDroneFolder)
        throw std::invalid_argument("split_train_val: China_Drone has no test set and is train-only");

    SplitPlan plan;
    plan.target_folder = target;
    plan.seed = seed;

    std::vector<std::string> ids = it->second;
    std::sort(ids.begin(), ids.end());
    if (ids.size() < 10)
        throw std::invalid_argument("split_train_val: target needs >= 10 usable images, has " +
                                    std::to_string(ids.size()));

    // Seeded Fisher-Yates over the sorted ids.
    Rng rng(seed);
    for (size_t i = ids.size() - 1; i > 0; --i)
        std::swap(ids[i], ids[rng.bounded(i + 1)]);

    const size_t n_val = ids.size() / 10;
    for (size_t i = 0; i < ids.size(); ++i)
        (i < n_val ? plan.val_ids : plan.train_ids).insert(ids[i]);

    for (const auto& [folder, folder_ids] : folders) {
        if (folder == target) continue;
        plan.train_ids.insert(folder_ids.begin(), folder_ids.end());
    }
    return plan;
}

std::map<std::string, FolderStats> stats(const std::vector<ImageRecord>& records) {
    std::map<std::string, FolderStats> out;
    for (const auto& r : records) {
        auto& fs = out[r.folder];
        ++fs.image_count;
        if (!r.annotations.empty()) ++fs.usable_count;
        for (const auto& a : r.annotations) ++fs.class_counts[static_cast<int>(a.cls)];
    }
    return out;
}

std::string stats_to_json(const std::map<std::string, FolderStats>& s) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [folder, fs] : s) {
        nlohmann::json classes;
        for (int c = 0; c < kNumClasses; ++c)
            classes[damage_code(static_cast<DamageClass>(c))] = fs.class_counts[c];
        j[folder] = {{"images", fs.image_count},
                     {"usable", fs.usable_count},
                     {"classes", classes}};
    }
    return j.dump(2);
}

std::string stats_to_csv(const std::map<std::string, FolderStats>& s) {
    std::ostringstream os;
    os << "folder,images,usable,D00,D10,D20,D40\n";
    for (const auto& [folder, fs] : s) {
        os << folder << ',' << fs.image_count << ',' << fs.usable_count;
        for (int c = 0; c < kNumClasses; ++c) os << ',' << fs.class_counts[c];
        os << '\n';
    }
    return os.str();
}

namespace {

// Minimal dimension probe for PNG and JPEG headers.
std::optional<std::pair<int, int>> probe_dims(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) return std::nullopt;
    unsigned char buf[32];
    is.read(reinterpret_cast<char*>(buf), 24);
    if (is.gcount() >= 24 && buf[0] == 0x89 && buf[1] == 'P' && buf[2] == 'N' && buf[3] == 'G') {
        const int w = (buf[16] << 24) | (buf[17] << 16) | (buf[18] << 8) | buf[19];
        const int h = (buf[20] << 24) | (buf[21] << 16) | (buf[22] << 8) | buf[23];
        return std::make_pair(w, h);
    }
    if (is.gcount() >= 2 && buf[0] == 0xFF && buf[1] == 0xD8) {
        is.seekg(2);
        while (is) {
            unsigned char marker[4];
            is.read(reinterpret_cast<char*>(marker), 4);
            if (!is || marker[0] != 0xFF) break;
            const int type = marker[1];
            const int len = (marker[2] << 8) | marker[3];
            if (type >= 0xC0 && type <= 0xCF && type != 0xC4 && type != 0xC8 && type != 0xCC) {
                unsigned char sof[5];
                is.read(reinterpret_cast<char*>(sof), 5);
                if (!is) break;
                const int h = (sof[1] << 8) | sof[2];
                const int w = (sof[3] << 8) | sof[4];
                return std::make_pair(w, h);
            }
            is.seekg(len - 2, std::ios::cur);
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<ImageRecord> load_records(const std::filesystem::path& root, int default_width,
                                      int default_height) {
    namespace fs = std::filesystem;
    std::vector<ImageRecord> out;
    if (!fs::is_directory(root)) throw std::runtime_error("not a directory: " + root.string());
    std::vector<fs::path> folders;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) folders.push_back(e.path());
    std::sort(folders.begin(), folders.end());

    for (const auto& folder : folders) {
        const fs::path labels = folder / "labels";
        const fs::path images = folder / "images";
        if (!fs::is_directory(labels)) continue;
        std::vector<fs::path> label_files;
        for (const auto& e : fs::directory_iterator(labels))
            if (e.path().extension() == ".txt") label_files.push_back(e.path());
        std::sort(label_files.begin(), label_files.end());

        for (const auto& lf : label_files) {
            ImageRecord rec;
            rec.id = lf.stem().string();
            rec.folder = folder.filename().string();
            rec.width = default_width;
            rec.height = default_height;
            for (const char* ext : {".jpg", ".png", ".jpeg"}) {
                const fs::path img_path = images / (rec.id + ext);
                if (fs::exists(img_path)) {
                    if (auto dims = probe_dims(img_path)) {
                        rec.width = dims->first;
                        rec.height = dims->second;
                    }
                    break;
                }
            }
            std::ifstream is(lf);
            std::stringstream ss;
            ss << is.rdbuf();
            try {
                rec.annotations = parse_label_file(ss.str());
            } catch (const LabelParseError& e) {
                throw std::runtime_error(lf.string() + ": " + e.what());
            }
            out.push_back(std::move(rec));
        }
    }
    return out;
}

void write_index(const std::filesystem::path& path, const std::vector<ImageRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        arr.push_back({{"id", r.id},
                       {"folder", r.folder},
                       {"width", r.width},
                       {"height", r.height},
                       {"annotations", r.annotations.size()}});
    }
    std::ofstream os(path);
    os << nlohmann::json{{"records", arr}}.dump(2) << '\n';
}

std::vector<ImageRecord> read_index(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open index " + path.string());
    nlohmann::json j;
    is >> j;
    std::vector<ImageRecord> out;
    for (const auto& e : j.at("records")) {
        ImageRecord r;
        r.id = e.at("id");
        r.folder = e.at("folder");
        r.width = e.at("width");
        r.height = e.at("height");
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace rdd::dataset
