#include "seedkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "seedkit/error.hpp"
#include "seedkit/png_io.hpp"
#include "seedkit/rng.hpp"
#include "seedkit/util.hpp"

namespace seedkit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int64_t height_mm(double h) { return int64_t(std::llround(h * 1000.0)); }

json params_to_json(const AugmentationParams& p) {
  json j = json::object();
  if (p.brightness_delta) j["brightness_delta"] = *p.brightness_delta;
  j["hflip"] = p.hflip;
  j["vflip"] = p.vflip;
  if (p.rotation_deg) j["rotation_deg"] = *p.rotation_deg;
  if (p.scale) j["scale"] = *p.scale;
  return j;
}

AugmentationParams params_from_json(const json& j) {
  AugmentationParams p;
  if (j.contains("brightness_delta")) p.brightness_delta = j["brightness_delta"].get<double>();
  p.hflip = j.value("hflip", false);
  p.vflip = j.value("vflip", false);
  if (j.contains("rotation_deg")) p.rotation_deg = j["rotation_deg"].get<double>();
  if (j.contains("scale")) p.scale = j["scale"].get<double>();
  return p;
}

struct Box {
  int x, y, w, h;
};

double box_iou(const Box& a, const Box& b) {
  const int x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.x + a.w, b.x + b.w);
  const int y1 = std::min(a.y + a.h, b.y + b.h);
  const double inter = double(std::max(0, x1 - x0)) * std::max(0, y1 - y0);
  if (inter <= 0) return 0.0;
  const double uni = double(a.w) * a.h + double(b.w) * b.h - inter;
  return inter / uni;
}

// Exact source-over onto an opaque background; (v + 127) / 255 rounds
// v / 255 to the nearest integer.
inline uint8_t blend_channel(int src, int dst, int alpha) {
  return uint8_t((alpha * src + (255 - alpha) * dst + 127) / 255);
}

}  // namespace

void CutoutPool::build_index() {
  by_id_.clear();
  by_id_.reserve(cutouts.size());
  for (size_t i = 0; i < cutouts.size(); ++i) by_id_.emplace(cutouts[i].id, i);
}

const SeedCutout& CutoutPool::at(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) fail(Status::missing_asset, "cutout not in pool: " + id);
  return cutouts[it->second];
}

void SynthesisConfig::validate() const {
  if (images_per_class < 1) fail(Status::config_invalid, "images_per_class must be >= 1");
  if (height_buckets.empty() || height_buckets.size() != height_weights.size()) {
    fail(Status::config_invalid, "height_buckets and height_weights must align");
  }
  for (int w : height_weights) {
    if (w < 0) fail(Status::config_invalid, "negative height weight");
  }
  int64_t weight_sum = 0;
  for (int w : height_weights) weight_sum += w;
  if (weight_sum == 0) fail(Status::config_invalid, "height weights sum to zero");
  if (min_seeds < 1 || max_seeds < min_seeds) {
    fail(Status::config_invalid, "invalid seeds-per-image range");
  }
}

std::vector<int> partition_counts(int total, const std::vector<int>& weights) {
  int64_t weight_sum = 0;
  for (int w : weights) weight_sum += w;
  std::vector<int> counts(weights.size(), 0);
  std::vector<double> frac(weights.size(), 0.0);
  int assigned = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    const double exact = double(total) * double(weights[i]) / double(weight_sum);
    counts[i] = int(std::floor(exact));
    frac[i] = exact - double(counts[i]);
    assigned += counts[i];
  }
  std::vector<size_t> order(weights.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return frac[a] > frac[b]; });
  for (size_t i = 0; assigned < total && i < order.size(); ++i, ++assigned) {
    ++counts[order[i]];
  }
  return counts;
}

SceneSpec plan_scene(uint64_t scene_seed, const CutoutPool& pool,
                     const std::vector<BackgroundCanvas>& canvases,
                     const AugmentationRanges& ranges,
                     const SynthesisConfig& cfg) {
  cfg.validate();
  ranges.validate();
  if (pool.cutouts.empty()) fail(Status::empty_pool, "cutout pool is empty");
  if (canvases.empty()) fail(Status::empty_input, "no canvases");

  Rng rng(scene_seed);
  SceneSpec spec;
  spec.scene_seed = scene_seed;
  spec.canvas_id = canvases[rng.next_below(canvases.size())].id;
  spec.class_label = pool.cutouts.front().class_label;
  spec.height_bucket = pool.cutouts.front().capture_height_m;

  const int n = int(rng.uniform_int(cfg.min_seeds, cfg.max_seeds));
  std::vector<Box> accepted;
  accepted.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    const SeedCutout& cut = pool.cutouts[rng.next_below(pool.cutouts.size())];
    Placement pl;
    pl.cutout_id = cut.id;
    pl.params = sample_params(hash64(scene_seed, uint64_t(i)), ranges);
    int aw, ah;
    augmented_size(cut.pixels.width, cut.pixels.height, pl.params, &aw, &ah);

    // Draw the center pixel uniformly in the output region; redraw only when
    // overlap rejection is on and the box overlaps an earlier one too much.
    Box box{0, 0, aw, ah};
    for (int attempt = 0; attempt < 100; ++attempt) {
      const int cx = int(rng.next_below(kOutputSize));
      const int cy = int(rng.next_below(kOutputSize));
      box.x = cx - aw / 2;
      box.y = cy - ah / 2;
      if (cfg.max_overlap_iou < 0.0) break;
      const bool ok = std::none_of(accepted.begin(), accepted.end(),
                                   [&](const Box& other) {
                                     return box_iou(box, other) > cfg.max_overlap_iou;
                                   });
      if (ok) break;
    }
    accepted.push_back(box);
    pl.x = box.x;
    pl.y = box.y;
    spec.placements.push_back(std::move(pl));
  }
  return spec;
}

ImageRGB8 compose_scene(const SceneSpec& spec, const CutoutPool& pool,
                        const std::vector<BackgroundCanvas>& canvases) {
  const BackgroundCanvas* canvas = nullptr;
  for (const auto& c : canvases) {
    if (c.id == spec.canvas_id) {
      canvas = &c;
      break;
    }
  }
  if (!canvas) fail(Status::missing_asset, "canvas not found: " + spec.canvas_id);
  const ImageRGB8& bg = canvas->pixels;
  if (bg.width < kOutputSize || bg.height < kOutputSize) {
    fail(Status::shape_error, "canvas " + spec.canvas_id + " smaller than output");
  }

  Rng crop_rng(hash64(spec.scene_seed, "crop"));
  const int cx = int(crop_rng.next_below(uint64_t(bg.width - kOutputSize) + 1));
  const int cy = int(crop_rng.next_below(uint64_t(bg.height - kOutputSize) + 1));

  ImageRGB8 out(kOutputSize, kOutputSize);
  for (int y = 0; y < kOutputSize; ++y) {
    std::copy_n(bg.px(cx, cy + y), size_t(kOutputSize) * 3, out.px(0, y));
  }

  for (const auto& pl : spec.placements) {
    const SeedCutout aug = augment(pool.at(pl.cutout_id), pl.params);
    const ImageRGBA8& sprite = aug.pixels;
    const int x_begin = std::max(0, -pl.x), x_end = std::min(sprite.width, kOutputSize - pl.x);
    const int y_begin = std::max(0, -pl.y), y_end = std::min(sprite.height, kOutputSize - pl.y);
    for (int sy = y_begin; sy < y_end; ++sy) {
      for (int sx = x_begin; sx < x_end; ++sx) {
        const uint8_t* src = sprite.px(sx, sy);
        const int a = src[3];
        if (a == 0) continue;
        uint8_t* dst = out.px(pl.x + sx, pl.y + sy);
        dst[0] = blend_channel(src[0], dst[0], a);
        dst[1] = blend_channel(src[1], dst[1], a);
        dst[2] = blend_channel(src[2], dst[2], a);
      }
    }
  }
  return out;
}

std::string to_json_string(const SceneSpec& spec) {
  json placements = json::array();
  for (const auto& pl : spec.placements) {
    placements.push_back({{"cutout_id", pl.cutout_id},
                          {"params", params_to_json(pl.params)},
                          {"x", pl.x},
                          {"y", pl.y}});
  }
  json j = {{"scene_seed", spec.scene_seed},
            {"canvas_id", spec.canvas_id},
            {"class_label", spec.class_label},
            {"height_bucket", spec.height_bucket},
            {"output_size", kOutputSize},
            {"placements", placements}};
  return j.dump();
}

SceneSpec scene_spec_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    SceneSpec spec;
    spec.scene_seed = j.at("scene_seed").get<uint64_t>();
    spec.canvas_id = j.at("canvas_id").get<std::string>();
    spec.class_label = j.at("class_label").get<std::string>();
    spec.height_bucket = j.at("height_bucket").get<double>();
    for (const auto& pj : j.at("placements")) {
      Placement pl;
      pl.cutout_id = pj.at("cutout_id").get<std::string>();
      pl.params = params_from_json(pj.at("params"));
      pl.x = pj.at("x").get<int>();
      pl.y = pj.at("y").get<int>();
      spec.placements.push_back(std::move(pl));
    }
    return spec;
  } catch (const json::exception& e) {
    fail(Status::config_invalid, std::string("bad scene spec: ") + e.what());
  }
}

PoolCollection load_pools(const fs::path& root) {
  if (!fs::is_directory(root)) {
    fail(Status::io_error, "pools directory not found: " + root.string());
  }
  PoolCollection pools;
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  for (const auto& class_dir : class_dirs) {
    const std::string cls = class_dir.filename().string();
    std::vector<fs::path> height_dirs;
    for (const auto& entry : fs::directory_iterator(class_dir)) {
      if (entry.is_directory()) height_dirs.push_back(entry.path());
    }
    std::sort(height_dirs.begin(), height_dirs.end());
    for (const auto& height_dir : height_dirs) {
      const fs::path index = height_dir / "pool_index.jsonl";
      if (!fs::exists(index)) continue;
      double height = 0.0;
      try {
        height = parse_double(height_dir.filename().string());
      } catch (const Error&) {
        continue;  // not a height directory
      }
      CutoutPool pool;
      pool.cutouts = read_cutout_pool(index);
      for (const auto& cut : pool.cutouts) {
        if (cut.class_label != cls || height_mm(cut.capture_height_m) != height_mm(height)) {
          fail(Status::corrupt_pool,
               "cutout " + cut.id + " does not belong in pool " + cls + "/" +
                   height_dir.filename().string());
        }
      }
      pool.build_index();
      pools[cls][height_mm(height)] = std::move(pool);
    }
  }
  return pools;
}

std::vector<BackgroundCanvas> load_canvases(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    fail(Status::io_error, "canvas directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  std::vector<BackgroundCanvas> canvases;
  for (const auto& f : files) {
    BackgroundCanvas c;
    c.id = f.stem().string();
    c.pixels = read_png_rgb(f);
    if (c.pixels.width < kOutputSize || c.pixels.height < kOutputSize) {
      fail(Status::config_invalid,
           "canvas " + f.string() + " is smaller than " +
               std::to_string(kOutputSize) + "x" + std::to_string(kOutputSize));
    }
    canvases.push_back(std::move(c));
  }
  if (canvases.empty()) {
    fail(Status::empty_input, "no canvas PNGs in " + dir.string());
  }
  return canvases;
}

DatasetManifest generate_dataset(const PoolCollection& pools,
                                 const std::vector<BackgroundCanvas>& canvases,
                                 const SynthesisConfig& cfg,
                                 const AugmentationRanges& ranges,
                                 uint64_t master_seed, const fs::path& out_dir,
                                 int jobs) {
  cfg.validate();
  ranges.validate();
  if (pools.empty()) fail(Status::missing_pool, "no cutout pools found");
  if (canvases.empty()) fail(Status::empty_input, "no canvases");
  for (const auto& [cls, by_height] : pools) {
    for (double h : cfg.height_buckets) {
      if (!by_height.count(height_mm(h))) {
        fail(Status::missing_pool,
             "missing pool for class " + cls + " at height " + format_double(h));
      }
    }
  }

  const std::vector<int> counts =
      partition_counts(cfg.images_per_class, cfg.height_weights);

  DatasetManifest manifest;
  for (const auto& entry : pools) manifest.class_list.push_back(entry.first);

  struct Job {
    const CutoutPool* pool;
    uint64_t scene_seed;
    fs::path path;
  };
  std::vector<Job> work;
  work.reserve(manifest.class_list.size() * size_t(cfg.images_per_class));
  for (const auto& cls : manifest.class_list) {
    fs::create_directories(out_dir / cls);
    const auto& by_height = pools.at(cls);
    int image = 0;
    for (size_t b = 0; b < cfg.height_buckets.size(); ++b) {
      const CutoutPool& pool = by_height.at(height_mm(cfg.height_buckets[b]));
      for (int k = 0; k < counts[b]; ++k, ++image) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%06d.png", cls.c_str(), image);
        const uint64_t seed = hash64(master_seed, cls, uint64_t(image));
        ManifestRecord rec;
        rec.image_path = cls + "/" + name;
        rec.class_label = cls;
        rec.height_m = cfg.height_buckets[b];
        rec.split = Split::unassigned;
        rec.scene_seed = seed;
        manifest.records.push_back(std::move(rec));
        work.push_back({&pool, seed, out_dir / cls / name});
      }
    }
  }

  parallel_for(work.size(), jobs, [&](size_t i) {
    const Job& job = work[i];
    const SceneSpec spec =
        plan_scene(job.scene_seed, *job.pool, canvases, ranges, cfg);
    write_png(job.path, compose_scene(spec, *job.pool, canvases));
  });
  return manifest;
}

}  // namespace seedkit
