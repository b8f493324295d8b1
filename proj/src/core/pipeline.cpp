#include "seedkit/pipeline.hpp"

#include <ctime>
#include <fstream>

#include "json.hpp"
#include "seedkit/classifier.hpp"
#include "seedkit/error.hpp"
#include "seedkit/ingest.hpp"
#include "seedkit/rng.hpp"
#include "seedkit/segment.hpp"
#include "seedkit/synth.hpp"

namespace seedkit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%S", &tm);
  return buf;
}

// Fresh directory under out_root; never reuses an existing one.
fs::path fresh_run_dir(const fs::path& out_root, uint64_t master_seed) {
  const std::string base = "run_" + utc_timestamp() + "_" + std::to_string(master_seed);
  fs::path dir = out_root / base;
  for (int i = 2; fs::exists(dir); ++i) {
    dir = out_root / (base + "_" + std::to_string(i));
  }
  fs::create_directories(dir);
  return dir;
}

// Runs one stage, tagging any failure with the stage name so the caller can
// tell where a multi-stage run stopped.
template <typename Fn>
void stage(const char* name, Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.status(), std::string("stage ") + name + ": " + e.what());
  }
}

json metrics_to_json(const MetricsReport& rep) {
  json per_class = json::array();
  for (size_t k = 0; k < rep.class_list.size(); ++k) {
    const ClassMetrics& m = rep.per_class[k];
    per_class.push_back({{"class", rep.class_list[k]},
                         {"accuracy", m.accuracy},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"precision_zero_den", m.precision_zero_den},
                         {"recall_zero_den", m.recall_zero_den}});
  }
  return {{"overall_accuracy", rep.overall_accuracy}, {"per_class", per_class}};
}

}  // namespace

PipelineResult run_pipeline(const GlobalConfig& cfg, const fs::path& out_root,
                            int jobs) {
  cfg.validate();
  // Pipeline-specific requirements, checked before anything is created.
  if (cfg.synthesis.canvases_dir.empty()) {
    fail(Status::config_invalid, "synthesis.canvases_dir is required for run");
  }
  if (cfg.synthesis.pools_dir.empty() && cfg.ingest.sources.empty()) {
    fail(Status::config_invalid,
         "run needs either synthesis.pools_dir or ingest.sources");
  }
  if (jobs < 1) jobs = 1;

  const fs::path run_dir = fresh_run_dir(out_root, cfg.master_seed);
  json stages = json::array();
  json artifacts = json::object();
  const bool from_pools = !cfg.synthesis.pools_dir.empty();

  // ingest + extract: video/frame sources become cutout pools under the run
  // directory; with a ready-made pools_dir both stages are skipped.
  fs::path pools_root = cfg.synthesis.pools_dir;
  std::vector<FrameSet> ingested;
  if (from_pools) {
    stages.push_back({{"name", "ingest"}, {"status", "skipped"}});
    stages.push_back({{"name", "extract"}, {"status", "skipped"}});
  } else {
    stage("ingest", [&] {
      for (size_t si = 0; si < cfg.ingest.sources.size(); ++si) {
        const IngestSource& src = cfg.ingest.sources[si];
        FrameSet frames;
        if (!src.video.empty()) {
          const fs::path frame_dir = run_dir / "frames" / src.class_label /
                                     format_double(src.height_m);
          fs::create_directories(frame_dir);
          frames = decode_video(src.video, cfg.ingest.decoder_command, frame_dir,
                                cfg.ingest.sample_every);
          for (auto& f : frames.frames) f.capture_height_m = src.height_m;
        } else {
          frames = load_frames(src.frames_dir, src.height_m);
        }
        // Frame ids become cutout ids downstream; the source index keeps two
        // captures of the same class and height from colliding.
        for (auto& f : frames.frames) f.id = "s" + std::to_string(si) + "_" + f.id;
        ingested.push_back(std::move(frames));
      }
      stages.push_back({{"name", "ingest"}, {"status", "ok"}});
      artifacts["frames"] = (run_dir / "frames").string();
    });

    pools_root = run_dir / "pools";
    stage("extract", [&] {
      for (size_t si = 0; si < cfg.ingest.sources.size(); ++si) {
        const IngestSource& src = cfg.ingest.sources[si];
        const FrameSet& frames = ingested[si];
        std::vector<size_t> picked;
        if (cfg.ingest.top_k > 0) {
          picked = select_frames(frames, size_t(cfg.ingest.top_k));
        } else {
          picked.resize(frames.frames.size());
          for (size_t i = 0; i < picked.size(); ++i) picked[i] = i;
        }
        std::vector<SeedCutout> cutouts;
        for (size_t idx : picked) {
          auto found = segment_frame(frames.frames[idx], cfg.segmentation,
                                     src.class_label, src.height_m);
          cutouts.insert(cutouts.end(), std::make_move_iterator(found.begin()),
                         std::make_move_iterator(found.end()));
        }
        const fs::path pool_dir =
            pools_root / src.class_label / format_double(src.height_m);
        write_cutout_pool(cutouts, pool_dir, /*append=*/true);
      }
      stages.push_back({{"name", "extract"}, {"status", "ok"}});
      artifacts["pools"] = pools_root.string();
    });
  }

  const fs::path dataset_dir = run_dir / "dataset";
  DatasetManifest manifest;
  stage("synth", [&] {
    const PoolCollection pools = load_pools(pools_root);
    const auto canvases = load_canvases(cfg.synthesis.canvases_dir);
    manifest = generate_dataset(pools, canvases, cfg.synthesis.config,
                                cfg.augmentation, cfg.master_seed, dataset_dir,
                                jobs);
    write_manifest(manifest, dataset_dir / "manifest.csv");
    stages.push_back({{"name", "synth"}, {"status", "ok"}});
    artifacts["dataset"] = dataset_dir.string();
    artifacts["manifest"] = (dataset_dir / "manifest.csv").string();
  });

  stage("split", [&] {
    split_dataset(manifest, cfg.split.train_fraction,
                  hash64(cfg.master_seed, "split"));
    write_manifest(manifest, dataset_dir / "manifest_split.csv");
    stages.push_back({{"name", "split"}, {"status", "ok"}});
    artifacts["manifest_split"] = (dataset_dir / "manifest_split.csv").string();
  });

  ManifestTrainResult trained;
  stage("train-baseline", [&] {
    HeadConfig head = cfg.training;
    head.init_seed = hash64(cfg.master_seed, "train");
    trained = train_on_manifest(manifest, dataset_dir, head, jobs);
    save_model(trained.model, trained.class_list, run_dir / "model.bin");
    json history = json::array();
    for (const EpochStats& e : trained.history) {
      history.push_back({{"train_loss", e.train_loss},
                         {"train_accuracy", e.train_accuracy},
                         {"val_loss", e.val_loss},
                         {"val_accuracy", e.val_accuracy}});
    }
    std::ofstream hist(run_dir / "history.json");
    hist << history.dump(2) << '\n';
    stages.push_back({{"name", "train-baseline"}, {"status", "ok"}});
    artifacts["model"] = (run_dir / "model.bin").string();
    artifacts["history"] = (run_dir / "history.json").string();
  });

  SoftmaxFile preds;
  stage("predict", [&] {
    preds = predict_on_manifest(trained.model, trained.class_list, manifest,
                                dataset_dir, Split::val, jobs);
    write_softmax_file(preds, run_dir / "preds_val.jsonl");
    stages.push_back({{"name", "predict"}, {"status", "ok"}});
    artifacts["predictions"] = (run_dir / "preds_val.jsonl").string();
  });

  PipelineResult result;
  result.run_dir = run_dir;
  stage("eval", [&] {
    const ConfusionMatrix cm = confusion(preds, manifest, Split::val);
    result.metrics = report(cm);
    std::ofstream csv(run_dir / "report.csv");
    csv << render_report_csv(result.metrics);
    std::ofstream txt(run_dir / "report.txt");
    txt << render_report_text(result.metrics);
    stages.push_back({{"name", "eval"}, {"status", "ok"}});
    artifacts["report_csv"] = (run_dir / "report.csv").string();
    artifacts["report_text"] = (run_dir / "report.txt").string();
  });

  json totals = json::object();
  for (const auto& cls : manifest.class_list) {
    totals[cls] = manifest.count_class(cls);
  }
  const json summary = {{"run_dir", run_dir.string()},
                        {"master_seed", cfg.master_seed},
                        {"jobs", jobs},
                        {"stages", stages},
                        {"artifacts", artifacts},
                        {"images", manifest.records.size()},
                        {"images_per_class", totals},
                        {"train_records", manifest.count_split(Split::train)},
                        {"val_records", manifest.count_split(Split::val)},
                        {"warnings", manifest.warnings},
                        {"metrics", metrics_to_json(result.metrics)}};
  result.summary_json = summary.dump(2);
  std::ofstream out(run_dir / "summary.json");
  out << result.summary_json << '\n';
  if (!out) fail(Status::io_error, "failed writing run summary");
  return result;
}

}  // namespace seedkit
