#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seedkit/image.hpp"
#include "seedkit/ingest.hpp"

namespace seedkit {

// One extracted seed: the RGBA crop of a single connected foreground
// component, alpha 255 inside the component mask and 0 elsewhere.
struct SeedCutout {
  std::string id;
  ImageRGBA8 pixels;
  std::string class_label;
  double capture_height_m = 0.0;
  std::string source_frame;
  int64_t area_px = 0;  // pixels with alpha > 127
};

struct SegmentationConfig {
  enum class ThresholdMode { otsu, fixed };
  ThresholdMode threshold_mode = ThresholdMode::otsu;
  int fixed_threshold = 128;   // used when threshold_mode == fixed
  int64_t min_area_px = 8;
  int64_t max_area_px = int64_t(1) << 30;
  int padding_px = 0;
  bool invert = false;  // false: foreground lighter than background

  void validate() const;
};

// Otsu's threshold over a 256-bin histogram: the t maximizing between-class
// variance with classes [0..t] and [t+1..255]. Ties and degenerate
// (single-bin) histograms resolve to the lowest such t.
int otsu_threshold(const std::array<uint64_t, 256>& histogram);

// Binarizes the frame (foreground = gray <= t when invert, gray > t
// otherwise), labels 8-connected components in raster-scan order, drops
// components outside [min_area_px, max_area_px], and crops each survivor
// with padding_px of transparent margin (clamped at frame borders).
// Cutout ids are "<frame.id>_s<component index>".
std::vector<SeedCutout> segment_frame(const Frame& frame,
                                      const SegmentationConfig& cfg,
                                      const std::string& class_label,
                                      double capture_height_m);

// Pool on disk: one RGBA PNG per cutout plus a JSON-Lines index
// (pool_index.jsonl) with one object per cutout:
//   {"id","file","class_label","capture_height_m","area_px"}
// With append=true, existing index records are kept and extended.
std::filesystem::path write_cutout_pool(const std::vector<SeedCutout>& cutouts,
                                        const std::filesystem::path& dir,
                                        bool append = false);

// Reads a pool index in order. Recomputes each cutout's area from its PNG and
// rejects mismatches (CorruptPool); missing PNGs raise MissingAsset.
std::vector<SeedCutout> read_cutout_pool(const std::filesystem::path& index_file);

}  // namespace seedkit
