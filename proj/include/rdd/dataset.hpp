#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rdd/boxes.hpp"
#include "rdd/image.hpp"

namespace rdd::dataset {

struct Annotation {
    DamageClass cls;
    NormBox box;
};

struct LabelParseError : std::runtime_error {
    LabelParseError(int line_no, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
    int line;
};

/// Parses "class cx cy w h" lines. Lines with out-of-range class indices or
/// malformed fields raise LabelParseError with the 1-based line number.
std::vector<Annotation> parse_label_file(const std::string& text);

/// 6 decimal places, space-separated, newline-terminated. parse/write/parse
/// is idempotent (the second write is bit-identical).
std::string write_label_file(const std::vector<Annotation>& anns);

struct ImageRecord {
    std::string id;
    std::string folder;
    int width = 0;
    int height = 0;
    std::vector<Annotation> annotations;
};

std::pair<std::vector<ImageRecord>, std::vector<ImageRecord>> filter_usable(
    const std::vector<ImageRecord>& records);

// ---------------------------------------------------------------------------
// Norway lower-left crop

inline constexpr int kNorwayRegionSide = 1824;

struct CropCounts {
    int kept = 0;
    int clipped = 0;
    int dropped = 0;
};

struct CropResult {
    ImageRecord record;
    std::optional<img::Image> image;
    CropCounts counts;
};

/// Crops the lower-left region_side x region_side region (display orientation;
/// with a top-left pixel origin this is x in [0,side), y in [H-side, H)).
/// Boxes are intersected with the region, translated, and dropped when the
/// intersection is under 1 px in either dimension.
CropResult norway_crop(const ImageRecord& rec, const img::Image* image = nullptr,
                       int region_side = kNorwayRegionSide);

// ---------------------------------------------------------------------------
// Train/validation split

struct SplitPlan {
    std::string target_folder;
    std::set<std::string> val_ids;
    std::set<std::string> train_ids;
    uint64_t seed = 0;
};

inline constexpr const char* kChinaDroneFolder = "China_Drone";

/// 10% (floor) of the target folder's usable ids go to validation, picked by a
/// seeded Fisher-Yates shuffle over the sorted ids; everything else, including
/// China_Drone, trains.
SplitPlan split_train_val(const std::map<std::string, std::vector<std::string>>& folders,
                          const std::string& target, uint64_t seed);

// ---------------------------------------------------------------------------
// Stats

struct FolderStats {
    int image_count = 0;
    int usable_count = 0;
    std::array<int, kNumClasses> class_counts = {0, 0, 0, 0};
};

std::map<std::string, FolderStats> stats(const std::vector<ImageRecord>& records);

std::string stats_to_json(const std::map<std::string, FolderStats>& s);
std::string stats_to_csv(const std::map<std::string, FolderStats>& s);

// ---------------------------------------------------------------------------
// On-disk layout: <root>/<folder>/images/*.{jpg,png} + <root>/<folder>/labels/*.txt

struct IndexedImage {
    std::string id;
    std::string folder;
    std::string image_path;  // empty when only the label exists
    std::string label_path;
    int width = 0;
    int height = 0;
    int annotation_count = 0;
};

/// Walks the layout, parses labels, and reads image dims from the declared
/// size in the index cache or from the files themselves via `probe_dims`.
std::vector<ImageRecord> load_records(const std::filesystem::path& root,
                                      int default_width = 640, int default_height = 640);

void write_index(const std::filesystem::path& path, const std::vector<ImageRecord>& records);
std::vector<ImageRecord> read_index(const std::filesystem::path& path);

}  // namespace rdd::dataset
