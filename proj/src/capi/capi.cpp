#include "seedkit.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "seedkit/classifier.hpp"
#include "seedkit/config.hpp"
#include "seedkit/error.hpp"
#include "seedkit/ingest.hpp"
#include "seedkit/metrics.hpp"
#include "seedkit/pipeline.hpp"
#include "seedkit/png_io.hpp"
#include "seedkit/rng.hpp"
#include "seedkit/segment.hpp"
#include "seedkit/softmax_io.hpp"
#include "seedkit/synth.hpp"
#include "seedkit/version.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

thread_local std::string g_last_error;

// Every entry point funnels through here: exceptions become status codes,
// the message lands in the thread's last-error slot.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return SK_OK;
  } catch (const seedkit::Error& e) {
    g_last_error = e.what();
    return int(e.status());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SK_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return SK_INTERNAL_ERROR;
  }
}

// malloc so C callers can pair every char** with sk_string_free.
char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) seedkit::fail(seedkit::Status::internal_error, "out of memory");
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const char* require(const char* arg, const char* name) {
  if (!arg) {
    seedkit::fail(seedkit::Status::config_invalid,
                  std::string(name) + " must not be null");
  }
  return arg;
}

std::string or_empty(const char* s) { return s ? std::string(s) : std::string(); }

json params_json(const seedkit::AugmentationParams& p) {
  json j = json::object();
  if (p.brightness_delta) j["brightness_delta"] = *p.brightness_delta;
  j["hflip"] = p.hflip;
  j["vflip"] = p.vflip;
  if (p.rotation_deg) j["rotation_deg"] = *p.rotation_deg;
  if (p.scale) j["scale"] = *p.scale;
  return j;
}

}  // namespace

struct sk_manifest {
  seedkit::DatasetManifest m;
};

struct sk_report {
  seedkit::MetricsReport rep;
};

extern "C" {

const char* sk_version(void) { return seedkit::kVersion; }

const char* sk_status_name(int status) {
  if (status < 0 || status > int(seedkit::Status::internal_error)) {
    return "UnknownStatus";
  }
  return seedkit::status_name(seedkit::Status(status));
}

const char* sk_last_error(void) { return g_last_error.c_str(); }

void sk_string_free(char* s) { std::free(s); }

uint64_t sk_derive_seed(uint64_t seed, const char* tag) {
  return seedkit::hash64(seed, tag ? tag : "");
}

int sk_ingest_video(const char* video_path, const char* decoder_template,
                    int sample_every, const char* out_dir, char** summary_json) {
  return guarded([&] {
    const seedkit::FrameSet frames = seedkit::decode_video(
        require(video_path, "video_path"), require(decoder_template, "decoder_template"),
        require(out_dir, "out_dir"), sample_every);
    if (summary_json) {
      json j = {{"frames", frames.frames.size()}, {"out_dir", out_dir}};
      for (const auto& [key, value] : frames.metadata) j[key] = value;
      *summary_json = dup_string(j.dump(2));
    }
  });
}

int sk_ingest_frames(const char* frames_dir, int top_k, char** summary_json) {
  return guarded([&] {
    const seedkit::FrameSet frames =
        seedkit::load_frames(require(frames_dir, "frames_dir"));
    json j = {{"frames", frames.frames.size()}};
    for (const auto& [key, value] : frames.metadata) j[key] = value;
    if (top_k > 0) {
      json ranked = json::array();
      for (size_t idx : seedkit::select_frames(frames, size_t(top_k))) {
        ranked.push_back(frames.frames[idx].id);
      }
      j["ranked"] = ranked;
    }
    if (summary_json) *summary_json = dup_string(j.dump(2));
  });
}

int sk_extract(const char* frame_png, const char* class_label, double height_m,
               const char* segmentation_json, const char* out_pool_dir,
               int append, char** summary_json) {
  return guarded([&] {
    const fs::path frame_path = require(frame_png, "frame_png");
    const std::string label = require(class_label, "class_label");
    const fs::path pool_dir = require(out_pool_dir, "out_pool_dir");
    const seedkit::SegmentationConfig cfg =
        seedkit::parse_segmentation_json(or_empty(segmentation_json));
    seedkit::Frame frame;
    frame.id = frame_path.stem().string();
    frame.source = frame_path.string();
    frame.pixels = seedkit::read_png_rgb(frame_path);
    frame.capture_height_m = height_m;
    const auto cutouts = seedkit::segment_frame(frame, cfg, label, height_m);
    const fs::path index =
        seedkit::write_cutout_pool(cutouts, pool_dir, append != 0);
    if (summary_json) {
      json j = {{"cutouts", cutouts.size()}, {"pool_index", index.string()}};
      *summary_json = dup_string(j.dump(2));
    }
  });
}

int sk_augment_preview(const char* cutout_png, const char* ranges_json,
                       uint64_t seed, int count, const char* out_dir,
                       char** summary_json) {
  return guarded([&] {
    if (count < 1) {
      seedkit::fail(seedkit::Status::config_invalid, "count must be >= 1");
    }
    const seedkit::AugmentationRanges ranges =
        seedkit::parse_augmentation_json(or_empty(ranges_json));
    const fs::path in_path = require(cutout_png, "cutout_png");
    const fs::path dir = require(out_dir, "out_dir");
    seedkit::SeedCutout cutout;
    cutout.id = in_path.stem().string();
    cutout.pixels = seedkit::read_png_rgba(in_path);
    cutout.source_frame = in_path.string();
    cutout.area_px = seedkit::opaque_area(cutout.pixels);
    fs::create_directories(dir);
    seedkit::write_png(dir / "before.png", cutout.pixels);
    json variants = json::array();
    for (int i = 0; i < count; ++i) {
      const seedkit::AugmentationParams params =
          seedkit::sample_params(seedkit::hash64(seed, uint64_t(i)), ranges);
      const seedkit::SeedCutout out = seedkit::augment(cutout, params);
      char name[32];
      std::snprintf(name, sizeof(name), "after_%03d.png", i);
      seedkit::write_png(dir / name, out.pixels);
      variants.push_back({{"file", name},
                          {"params", params_json(params)},
                          {"width", out.pixels.width},
                          {"height", out.pixels.height},
                          {"area_px", out.area_px}});
    }
    if (summary_json) {
      json j = {{"before", (dir / "before.png").string()}, {"variants", variants}};
      *summary_json = dup_string(j.dump(2));
    }
  });
}

int sk_synthesize(const char* pools_dir, const char* canvases_dir,
                  const char* synthesis_json, const char* augmentation_json,
                  uint64_t master_seed, int jobs, const char* out_dir,
                  char** summary_json) {
  return guarded([&] {
    const seedkit::SynthesisConfig cfg =
        seedkit::parse_synthesis_json(or_empty(synthesis_json));
    const seedkit::AugmentationRanges ranges =
        seedkit::parse_augmentation_json(or_empty(augmentation_json));
    const seedkit::PoolCollection pools =
        seedkit::load_pools(require(pools_dir, "pools_dir"));
    const auto canvases =
        seedkit::load_canvases(require(canvases_dir, "canvases_dir"));
    const fs::path out = require(out_dir, "out_dir");
    seedkit::DatasetManifest manifest = seedkit::generate_dataset(
        pools, canvases, cfg, ranges, master_seed, out, jobs < 1 ? 1 : jobs);
    seedkit::write_manifest(manifest, out / "manifest.csv");
    if (summary_json) {
      json per_class = json::object();
      for (const auto& cls : manifest.class_list) {
        per_class[cls] = manifest.count_class(cls);
      }
      json j = {{"images", manifest.records.size()},
                {"manifest", (out / "manifest.csv").string()},
                {"images_per_class", per_class}};
      *summary_json = dup_string(j.dump(2));
    }
  });
}

int sk_manifest_read(const char* path, sk_manifest** out) {
  return guarded([&] {
    require(path, "path");
    auto* handle = new sk_manifest{seedkit::read_manifest(path)};
    *out = handle;
  });
}

int sk_manifest_write(const sk_manifest* m, const char* path) {
  return guarded([&] {
    if (!m) seedkit::fail(seedkit::Status::config_invalid, "manifest handle is null");
    seedkit::write_manifest(m->m, require(path, "path"));
  });
}

int sk_manifest_split(sk_manifest* m, double train_fraction, uint64_t split_seed) {
  return guarded([&] {
    if (!m) seedkit::fail(seedkit::Status::config_invalid, "manifest handle is null");
    seedkit::split_dataset(m->m, train_fraction, split_seed);
  });
}

int sk_manifest_counts(const sk_manifest* m, char** counts_json) {
  return guarded([&] {
    if (!m) seedkit::fail(seedkit::Status::config_invalid, "manifest handle is null");
    json per_class = json::object();
    for (const auto& cls : m->m.class_list) {
      per_class[cls] = m->m.count_class(cls);
    }
    using seedkit::Split;
    json j = {{"records", m->m.records.size()},
              {"classes", m->m.class_list},
              {"per_class", per_class},
              {"per_split",
               {{"train", m->m.count_split(Split::train)},
                {"val", m->m.count_split(Split::val)},
                {"test", m->m.count_split(Split::test)},
                {"unassigned", m->m.count_split(Split::unassigned)}}},
              {"warnings", m->m.warnings}};
    if (counts_json) *counts_json = dup_string(j.dump(2));
  });
}

void sk_manifest_free(sk_manifest* m) { delete m; }

int sk_train(const char* manifest_csv, const char* training_json,
             uint64_t init_seed, int jobs, const char* model_out,
             char** history_json) {
  return guarded([&] {
    const fs::path manifest_path = require(manifest_csv, "manifest_csv");
    seedkit::HeadConfig cfg =
        seedkit::parse_training_json(or_empty(training_json));
    cfg.init_seed = init_seed;
    const seedkit::DatasetManifest manifest = seedkit::read_manifest(manifest_path);
    const seedkit::ManifestTrainResult result = seedkit::train_on_manifest(
        manifest, manifest_path.parent_path(), cfg, jobs < 1 ? 1 : jobs);
    seedkit::save_model(result.model, result.class_list,
                        require(model_out, "model_out"));
    if (history_json) {
      json hist = json::array();
      for (const auto& e : result.history) {
        hist.push_back({{"train_loss", e.train_loss},
                        {"train_accuracy", e.train_accuracy},
                        {"val_loss", e.val_loss},
                        {"val_accuracy", e.val_accuracy}});
      }
      *history_json = dup_string(hist.dump(2));
    }
  });
}

int sk_predict(const char* model_path, const char* manifest_csv,
               const char* split, int jobs, const char* preds_out) {
  return guarded([&] {
    const fs::path manifest_path = require(manifest_csv, "manifest_csv");
    const seedkit::LoadedModel lm =
        seedkit::load_model(require(model_path, "model_path"));
    const seedkit::DatasetManifest manifest = seedkit::read_manifest(manifest_path);
    const seedkit::Split which = seedkit::parse_split(require(split, "split"));
    const seedkit::SoftmaxFile preds = seedkit::predict_on_manifest(
        lm.model, lm.class_list, manifest, manifest_path.parent_path(), which,
        jobs < 1 ? 1 : jobs);
    seedkit::write_softmax_file(preds, require(preds_out, "preds_out"));
  });
}

int sk_ensemble(const char* const* input_paths, size_t input_count,
                const double* weights, size_t weight_count,
                const char* out_path) {
  return guarded([&] {
    if (!input_paths || input_count == 0) {
      seedkit::fail(seedkit::Status::empty_input, "no input files");
    }
    std::vector<seedkit::SoftmaxFile> inputs;
    inputs.reserve(input_count);
    for (size_t i = 0; i < input_count; ++i) {
      inputs.push_back(seedkit::read_softmax_file(
          require(input_paths[i], "input path"), /*require_normalized=*/true));
    }
    std::vector<double> w;
    if (weights && weight_count > 0) w.assign(weights, weights + weight_count);
    const seedkit::EnsembleResult result = seedkit::ensemble_predict(inputs, w);
    seedkit::write_softmax_file(result.combined, require(out_path, "out_path"));
  });
}

int sk_evaluate(const char* preds_path, const char* manifest_csv,
                const char* split, sk_report** out) {
  return guarded([&] {
    // Accept both per-model files (normalized) and combined ensemble sums.
    const seedkit::SoftmaxFile preds = seedkit::read_softmax_file(
        require(preds_path, "preds_path"), /*require_normalized=*/false);
    const seedkit::DatasetManifest manifest =
        seedkit::read_manifest(require(manifest_csv, "manifest_csv"));
    const seedkit::Split which = seedkit::parse_split(require(split, "split"));
    const seedkit::ConfusionMatrix cm = seedkit::confusion(preds, manifest, which);
    auto* handle = new sk_report{seedkit::report(cm)};
    *out = handle;
  });
}

int sk_report_text(const sk_report* r, char** text_out) {
  return guarded([&] {
    if (!r) seedkit::fail(seedkit::Status::config_invalid, "report handle is null");
    if (text_out) *text_out = dup_string(seedkit::render_report_text(r->rep));
  });
}

int sk_report_csv(const sk_report* r, char** csv_out) {
  return guarded([&] {
    if (!r) seedkit::fail(seedkit::Status::config_invalid, "report handle is null");
    if (csv_out) *csv_out = dup_string(seedkit::render_report_csv(r->rep));
  });
}

int sk_report_overall_accuracy(const sk_report* r, double* out) {
  return guarded([&] {
    if (!r) seedkit::fail(seedkit::Status::config_invalid, "report handle is null");
    if (out) *out = r->rep.overall_accuracy;
  });
}

void sk_report_free(sk_report* r) { delete r; }

int sk_run(const char* config_path, const char* out_root, int jobs,
           char** summary_json) {
  return guarded([&] {
    const seedkit::GlobalConfig cfg =
        seedkit::load_global_config(require(config_path, "config_path"));
    const seedkit::PipelineResult result =
        seedkit::run_pipeline(cfg, require(out_root, "out_root"), jobs);
    if (summary_json) *summary_json = dup_string(result.summary_json);
  });
}

}  // extern "C"
