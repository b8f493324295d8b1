#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "seedkit/augment.hpp"
#include "seedkit/manifest.hpp"
#include "seedkit/segment.hpp"

namespace seedkit {

// Every generated image is exactly this size (square, RGB).
inline constexpr int kOutputSize = 224;

struct BackgroundCanvas {
  std::string id;
  ImageRGB8 pixels;  // must be at least kOutputSize in both dimensions
};

struct CutoutPool {
  std::vector<SeedCutout> cutouts;

  void build_index();
  const SeedCutout& at(const std::string& id) const;  // MissingAsset if absent

 private:
  std::unordered_map<std::string, size_t> by_id_;
};

struct Placement {
  std::string cutout_id;
  AugmentationParams params;
  int x = 0;  // top-left of the augmented cutout on the output image
  int y = 0;
};

// Deterministic recipe for one synthetic image. Everything compose_scene
// does, including the canvas crop window, derives from scene_seed, which is
// why a manifest row is enough to re-render its image bit-exactly.
struct SceneSpec {
  uint64_t scene_seed = 0;
  std::string canvas_id;
  std::string class_label;
  double height_bucket = 0.0;
  std::vector<Placement> placements;
};

std::string to_json_string(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const std::string& text);

struct SynthesisConfig {
  int images_per_class = 1000;
  std::vector<double> height_buckets = {0.3, 0.5, 0.7};
  std::vector<int> height_weights = {333, 333, 334};
  int min_seeds = 20;
  int max_seeds = 50;
  // IoU cap for rejection-sampling placements; negative disables (default:
  // seeds may overlap freely, source-over order decides).
  double max_overlap_iou = -1.0;

  void validate() const;
};

// Splits total into one count per weight, proportionally, by largest
// remainder (earlier bucket wins ties). Sum of counts == total.
std::vector<int> partition_counts(int total, const std::vector<int>& weights);

// Plans one scene from a generator seeded with scene_seed: canvas choice,
// seed count N in [min_seeds, max_seeds], then per placement a cutout drawn
// with replacement, params from sample_params(hash64(scene_seed, index)), and
// a position drawn so the augmented cutout's center pixel lies inside the
// output region.
SceneSpec plan_scene(uint64_t scene_seed, const CutoutPool& pool,
                     const std::vector<BackgroundCanvas>& canvases,
                     const AugmentationRanges& ranges,
                     const SynthesisConfig& cfg);

// Renders a spec: crops a window from the canvas (position from
// hash64(scene_seed, "crop") when the canvas is larger than the output),
// then source-over composites each augmented cutout in placement order.
ImageRGB8 compose_scene(const SceneSpec& spec, const CutoutPool& pool,
                        const std::vector<BackgroundCanvas>& canvases);

// Cutout pools on disk, grouped as <root>/<class>/<height>/pool_index.jsonl
// with <height> spelled like "0.3". Heights are keyed internally in
// millimeters to keep map keys exact.
using PoolCollection = std::map<std::string, std::map<int64_t, CutoutPool>>;
PoolCollection load_pools(const std::filesystem::path& root);

// All PNGs in dir, sorted by filename; id is the file stem.
std::vector<BackgroundCanvas> load_canvases(const std::filesystem::path& dir);

// Generates images_per_class scenes per class under
// out_dir/<class>/<class>_NNNNNN.png. Image i of a class uses
// scene_seed = hash64(master_seed, class_label, i); the first counts[0]
// images take the first height bucket and so on, with counts from
// partition_counts (1000 images yield 333/333/334 by default). Rendering
// parallelizes over images (jobs threads); output is independent of jobs
// because every image derives from its own seed. Returned records have
// split=unassigned; the caller writes the manifest.
DatasetManifest generate_dataset(const PoolCollection& pools,
                                 const std::vector<BackgroundCanvas>& canvases,
                                 const SynthesisConfig& cfg,
                                 const AugmentationRanges& ranges,
                                 uint64_t master_seed,
                                 const std::filesystem::path& out_dir,
                                 int jobs = 1);

}  // namespace seedkit
