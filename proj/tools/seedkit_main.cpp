// seedkit command-line tool. All real work happens behind the C API in
// libseedkit; this file only parses flags, merges them over the optional
// global JSON config, and maps status codes to exit codes
// (0 success, 1 runtime failure, 2 usage/config error).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seedkit.h"

namespace {

using nlohmann::json;

struct UsageError {
  std::string message;
};

[[noreturn]] void usage_fail(const std::string& msg) { throw UsageError{msg}; }

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) usage_fail("cannot open config file " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) usage_fail("config file " + path + " is not a JSON object");
    return j;
  } catch (const json::exception& e) {
    usage_fail("config file " + path + ": " + e.what());
  }
}

std::string section_dump(const json& cfg, const char* name) {
  return cfg.contains(name) ? cfg.at(name).dump() : std::string();
}

// --jobs flag beats the config's "jobs", which beats SEEDKIT_JOBS, which
// beats the serial default.
int resolve_jobs(int flag_value, const json& cfg) {
  if (flag_value > 0) return flag_value;
  if (cfg.contains("jobs") && cfg.at("jobs").is_number_integer()) {
    const int v = cfg.at("jobs").get<int>();
    if (v > 0) return v;
  }
  if (const char* env = std::getenv("SEEDKIT_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

uint64_t resolve_seed(bool flag_set, uint64_t flag_value, const json& cfg) {
  if (flag_set) return flag_value;
  if (cfg.contains("master_seed")) return cfg.at("master_seed").get<uint64_t>();
  return 0;
}

int fail_status(int status) {
  std::cerr << "error (" << sk_status_name(status) << "): " << sk_last_error()
            << "\n";
  return status == SK_CONFIG_INVALID ? 2 : 1;
}

void print_owned(char* s) {
  if (s) {
    std::cout << s << "\n";
    sk_string_free(s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic seed-image dataset generation, baseline training and ensemble evaluation"};
  app.name("seedkit");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("seedkit ") + sk_version());

  // ingest
  auto* ingest = app.add_subcommand(
      "ingest", "Decode a video into PNG frames, or load and rank a frame directory");
  std::string in_video, in_frames, in_decoder, in_out, in_config;
  int in_every = 0, in_topk = 0;
  double in_height = 0.0;
  ingest->add_option("--video", in_video, "Video file to decode");
  ingest->add_option("--decoder-cmd", in_decoder,
                     "Decoder command template with {input} and {output_pattern}");
  ingest->add_option("--every", in_every, "Keep every Nth emitted frame");
  ingest->add_option("--out", in_out, "Output directory for decoded frames");
  ingest->add_option("--frames", in_frames, "Directory of ready PNG frames");
  ingest->add_option("--height-m", in_height, "Capture height tag for the report");
  ingest->add_option("--top-k", in_topk, "Also list the K sharpest frames");
  ingest->add_option("--config", in_config, "Global JSON config file");

  // extract
  auto* extract = app.add_subcommand(
      "extract", "Segment seed cutouts out of a frame into a cutout pool");
  std::string ex_frame, ex_class, ex_threshold, ex_out, ex_config;
  double ex_height = 0.0;
  int64_t ex_min_area = 0, ex_max_area = 0;
  int ex_padding = 0;
  bool ex_invert = false, ex_append = false;
  extract->add_option("--frame", ex_frame, "Frame PNG to segment")->required();
  extract->add_option("--class", ex_class, "Class label for the cutouts")->required();
  extract->add_option("--height-m", ex_height, "Capture height in meters")->required();
  extract->add_option("--threshold", ex_threshold,
                      "\"otsu\" or a fixed gray threshold 0..255");
  extract->add_option("--min-area", ex_min_area, "Minimum component area in pixels");
  extract->add_option("--max-area", ex_max_area, "Maximum component area in pixels");
  extract->add_option("--padding", ex_padding, "Transparent margin around each cutout");
  extract->add_flag("--invert", ex_invert, "Foreground is darker than background");
  extract->add_flag("--append", ex_append, "Extend an existing pool");
  extract->add_option("--out", ex_out, "Cutout pool directory")->required();
  extract->add_option("--config", ex_config, "Global JSON config file");

  // augment-preview
  auto* preview = app.add_subcommand(
      "augment-preview", "Write before/after PNGs for sampled augmentations of a cutout");
  std::string pv_in, pv_out, pv_config;
  uint64_t pv_seed = 0;
  int pv_count = 8;
  preview->add_option("--in", pv_in, "RGBA cutout PNG")->required();
  preview->add_option("--seed", pv_seed, "Sampling seed");
  preview->add_option("--count", pv_count, "Number of variants");
  preview->add_option("--out", pv_out, "Output directory")->required();
  preview->add_option("--config", pv_config, "Global JSON config file");

  // synth
  auto* synth = app.add_subcommand(
      "synth", "Generate the synthetic dataset from cutout pools and canvases");
  std::string sy_pools, sy_canvases, sy_out, sy_config;
  int sy_images = 0, sy_jobs = 0;
  uint64_t sy_seed = 0;
  synth->add_option("--pools", sy_pools, "Cutout pools root directory");
  synth->add_option("--canvases", sy_canvases, "Canvas PNG directory");
  synth->add_option("--out", sy_out, "Dataset output directory")->required();
  synth->add_option("--images-per-class", sy_images, "Images generated per class");
  auto* sy_seed_opt = synth->add_option("--seed", sy_seed, "Master seed");
  synth->add_option("--jobs", sy_jobs, "Worker threads");
  synth->add_option("--config", sy_config, "Global JSON config file");

  // split
  auto* split = app.add_subcommand(
      "split", "Assign train/val splits to a dataset manifest");
  std::string sp_manifest, sp_out, sp_config;
  double sp_train = 0.0;
  uint64_t sp_seed = 0;
  split->add_option("--manifest", sp_manifest, "Manifest CSV")->required();
  split->add_option("--train", sp_train, "Training fraction in (0, 1)");
  auto* sp_seed_opt = split->add_option(
      "--seed", sp_seed, "Split seed (default: derived from the config's master seed)");
  split->add_option("--out", sp_out, "Output manifest path (default: in place)");
  split->add_option("--config", sp_config, "Global JSON config file");

  // train-baseline
  auto* train = app.add_subcommand(
      "train-baseline", "Train the baseline softmax head on a split manifest");
  std::string tr_manifest, tr_model, tr_history, tr_config;
  int tr_jobs = 0;
  uint64_t tr_seed = 0;
  train->add_option("--manifest", tr_manifest, "Split manifest CSV")->required();
  train->add_option("--out", tr_model, "Model file to write")->required();
  train->add_option("--history", tr_history,
                    "Write per-epoch history JSON here instead of stdout");
  auto* tr_seed_opt = train->add_option("--seed", tr_seed, "Master seed override");
  train->add_option("--jobs", tr_jobs, "Worker threads for feature loading");
  train->add_option("--config", tr_config, "Global JSON config file");

  // predict
  auto* predict = app.add_subcommand(
      "predict", "Write per-image softmax probabilities for one manifest split");
  std::string pr_model, pr_manifest, pr_split = "val", pr_out;
  int pr_jobs = 0;
  std::string pr_config;
  predict->add_option("--model", pr_model, "Model file")->required();
  predict->add_option("--manifest", pr_manifest, "Manifest CSV")->required();
  predict->add_option("--split", pr_split, "train, val or test");
  predict->add_option("--out", pr_out, "Output softmax JSONL")->required();
  predict->add_option("--jobs", pr_jobs, "Worker threads");
  predict->add_option("--config", pr_config, "Global JSON config file");

  // ensemble
  auto* ensemble = app.add_subcommand(
      "ensemble", "Sum softmax files into a combined prediction file");
  std::vector<std::string> en_inputs;
  std::vector<double> en_weights;
  std::string en_out, en_config;
  ensemble->add_option("--inputs", en_inputs, "Member softmax JSONL files")
      ->required()
      ->expected(-1);
  ensemble->add_option("--weights", en_weights, "Per-member weights")->expected(-1);
  ensemble->add_option("--out", en_out, "Combined output JSONL")->required();
  ensemble->add_option("--config", en_config, "Global JSON config file");

  // eval
  auto* eval = app.add_subcommand(
      "eval", "Confusion-matrix metrics of a prediction file against a manifest split");
  std::string ev_preds, ev_manifest, ev_split = "val", ev_report;
  eval->add_option("--preds", ev_preds, "Softmax or combined JSONL")->required();
  eval->add_option("--manifest", ev_manifest, "Manifest CSV")->required();
  eval->add_option("--split", ev_split, "train, val or test");
  eval->add_option("--report", ev_report, "Write the CSV report here");

  // run
  auto* run = app.add_subcommand(
      "run", "Execute the full pipeline under a fresh run directory");
  std::string rn_config, rn_out;
  int rn_jobs = 0;
  run->add_option("--config", rn_config, "Global JSON config file")->required();
  run->add_option("--out", rn_out, "Directory to create the run directory in")
      ->required();
  run->add_option("--jobs", rn_jobs, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*ingest) {
      const json cfg = load_config(in_config);
      const json icfg = cfg.value("ingest", json::object());
      if (in_video.empty() == in_frames.empty()) {
        usage_fail("ingest: give exactly one of --video or --frames");
      }
      char* summary = nullptr;
      if (!in_video.empty()) {
        if (in_out.empty()) usage_fail("ingest: --video requires --out");
        std::string cmd = in_decoder.empty()
                              ? icfg.value("decoder_command", std::string())
                              : in_decoder;
        const int every =
            in_every > 0 ? in_every : icfg.value("sample_every", 1);
        const int rc = sk_ingest_video(in_video.c_str(), cmd.c_str(), every,
                                       in_out.c_str(), &summary);
        if (rc != SK_OK) return fail_status(rc);
      } else {
        const int rc = sk_ingest_frames(in_frames.c_str(), in_topk, &summary);
        if (rc != SK_OK) return fail_status(rc);
      }
      if (ingest->count("--height-m") > 0 && summary) {
        json j = json::parse(summary);
        j["height_m"] = in_height;
        sk_string_free(summary);
        summary = nullptr;
        std::cout << j.dump(2) << "\n";
      } else {
        print_owned(summary);
      }
      return 0;
    }

    if (*extract) {
      const json cfg = load_config(ex_config);
      json seg = cfg.value("segmentation", json::object());
      if (!ex_threshold.empty()) {
        if (ex_threshold == "otsu") {
          seg["threshold_mode"] = "otsu";
        } else {
          char* end = nullptr;
          const long v = std::strtol(ex_threshold.c_str(), &end, 10);
          if (!end || *end != '\0') {
            usage_fail("extract: --threshold must be \"otsu\" or an integer");
          }
          seg["threshold_mode"] = "fixed";
          seg["fixed_threshold"] = int(v);
        }
      }
      if (extract->count("--min-area") > 0) seg["min_area_px"] = ex_min_area;
      if (extract->count("--max-area") > 0) seg["max_area_px"] = ex_max_area;
      if (extract->count("--padding") > 0) seg["padding_px"] = ex_padding;
      if (ex_invert) seg["invert"] = true;
      char* summary = nullptr;
      const int rc =
          sk_extract(ex_frame.c_str(), ex_class.c_str(), ex_height,
                     seg.dump().c_str(), ex_out.c_str(), ex_append ? 1 : 0, &summary);
      if (rc != SK_OK) return fail_status(rc);
      print_owned(summary);
      return 0;
    }

    if (*preview) {
      const json cfg = load_config(pv_config);
      const std::string ranges = section_dump(cfg, "augmentation");
      char* summary = nullptr;
      const int rc = sk_augment_preview(pv_in.c_str(), ranges.c_str(), pv_seed,
                                        pv_count, pv_out.c_str(), &summary);
      if (rc != SK_OK) return fail_status(rc);
      print_owned(summary);
      return 0;
    }

    if (*synth) {
      const json cfg = load_config(sy_config);
      json scfg = cfg.value("synthesis", json::object());
      const std::string pools =
          !sy_pools.empty() ? sy_pools : scfg.value("pools_dir", std::string());
      const std::string canvases = !sy_canvases.empty()
                                       ? sy_canvases
                                       : scfg.value("canvases_dir", std::string());
      if (pools.empty()) usage_fail("synth: --pools (or synthesis.pools_dir) required");
      if (canvases.empty()) {
        usage_fail("synth: --canvases (or synthesis.canvases_dir) required");
      }
      if (synth->count("--images-per-class") > 0) {
        scfg["images_per_class"] = sy_images;
      }
      const uint64_t seed = resolve_seed(!sy_seed_opt->empty(), sy_seed, cfg);
      const int jobs = resolve_jobs(sy_jobs, cfg);
      char* summary = nullptr;
      const int rc = sk_synthesize(pools.c_str(), canvases.c_str(),
                                   scfg.dump().c_str(),
                                   section_dump(cfg, "augmentation").c_str(), seed,
                                   jobs, sy_out.c_str(), &summary);
      if (rc != SK_OK) return fail_status(rc);
      print_owned(summary);
      return 0;
    }

    if (*split) {
      const json cfg = load_config(sp_config);
      double fraction = sp_train;
      if (split->count("--train") == 0) {
        fraction = cfg.contains("split")
                       ? cfg.at("split").value("train_fraction", 0.8)
                       : 0.8;
      }
      const uint64_t seed =
          !sp_seed_opt->empty()
              ? sp_seed
              : sk_derive_seed(resolve_seed(false, 0, cfg), "split");
      sk_manifest* m = nullptr;
      int rc = sk_manifest_read(sp_manifest.c_str(), &m);
      if (rc != SK_OK) return fail_status(rc);
      rc = sk_manifest_split(m, fraction, seed);
      if (rc == SK_OK) {
        const std::string out = sp_out.empty() ? sp_manifest : sp_out;
        rc = sk_manifest_write(m, out.c_str());
      }
      char* counts = nullptr;
      if (rc == SK_OK) rc = sk_manifest_counts(m, &counts);
      sk_manifest_free(m);
      if (rc != SK_OK) return fail_status(rc);
      print_owned(counts);
      return 0;
    }

    if (*train) {
      const json cfg = load_config(tr_config);
      const uint64_t master = resolve_seed(!tr_seed_opt->empty(), tr_seed, cfg);
      const uint64_t init_seed = sk_derive_seed(master, "train");
      const int jobs = resolve_jobs(tr_jobs, cfg);
      char* history = nullptr;
      const int rc = sk_train(tr_manifest.c_str(),
                              section_dump(cfg, "training").c_str(), init_seed,
                              jobs, tr_model.c_str(), &history);
      if (rc != SK_OK) return fail_status(rc);
      if (!tr_history.empty() && history) {
        std::ofstream out(tr_history);
        out << history << "\n";
        if (!out) {
          std::cerr << "error (IoError): cannot write " << tr_history << "\n";
          sk_string_free(history);
          return 1;
        }
        sk_string_free(history);
        std::cout << "model: " << tr_model << "\nhistory: " << tr_history << "\n";
      } else {
        print_owned(history);
      }
      return 0;
    }

    if (*predict) {
      const json cfg = load_config(pr_config);
      const int jobs = resolve_jobs(pr_jobs, cfg);
      const int rc = sk_predict(pr_model.c_str(), pr_manifest.c_str(),
                                pr_split.c_str(), jobs, pr_out.c_str());
      if (rc != SK_OK) return fail_status(rc);
      std::cout << "predictions: " << pr_out << "\n";
      return 0;
    }

    if (*ensemble) {
      const json cfg = load_config(en_config);
      std::vector<double> weights = en_weights;
      if (weights.empty() && cfg.contains("ensemble")) {
        weights = cfg.at("ensemble")
                      .value("weights", std::vector<double>{});
      }
      std::vector<const char*> paths;
      paths.reserve(en_inputs.size());
      for (const auto& p : en_inputs) paths.push_back(p.c_str());
      const int rc = sk_ensemble(paths.data(), paths.size(),
                                 weights.empty() ? nullptr : weights.data(),
                                 weights.size(), en_out.c_str());
      if (rc != SK_OK) return fail_status(rc);
      std::cout << "combined: " << en_out << "\n";
      return 0;
    }

    if (*eval) {
      sk_report* rep = nullptr;
      int rc = sk_evaluate(ev_preds.c_str(), ev_manifest.c_str(),
                           ev_split.c_str(), &rep);
      if (rc != SK_OK) return fail_status(rc);
      char* text = nullptr;
      rc = sk_report_text(rep, &text);
      if (rc == SK_OK && !ev_report.empty()) {
        char* csv = nullptr;
        rc = sk_report_csv(rep, &csv);
        if (rc == SK_OK) {
          std::ofstream out(ev_report);
          out << csv;
          if (!out) {
            std::cerr << "error (IoError): cannot write " << ev_report << "\n";
            rc = SK_IO_ERROR;
          }
        }
        sk_string_free(csv);
      }
      sk_report_free(rep);
      if (rc != SK_OK) {
        sk_string_free(text);
        return rc == SK_IO_ERROR ? 1 : fail_status(rc);
      }
      if (text) {
        std::cout << text;
        sk_string_free(text);
      }
      return 0;
    }

    if (*run) {
      const json cfg = load_config(rn_config);
      const int jobs = resolve_jobs(rn_jobs, cfg);
      char* summary = nullptr;
      const int rc = sk_run(rn_config.c_str(), rn_out.c_str(), jobs, &summary);
      if (rc != SK_OK) return fail_status(rc);
      print_owned(summary);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << e.message << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
