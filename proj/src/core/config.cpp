#include "seedkit/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "seedkit/error.hpp"

namespace seedkit {
namespace {

using nlohmann::json;

// Strict parsing: every key must be known, every value well-typed. Typos in a
// config should fail loudly, not silently fall back to defaults.
void check_keys(const json& j, const char* section,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail(Status::config_invalid,
           std::string("unknown key \"") + key + "\" in " + section);
    }
  }
}

[[noreturn]] void bad(const char* section, const std::string& what) {
  fail(Status::config_invalid, std::string(section) + ": " + what);
}

json parse_object(const std::string& text, const char* what) {
  if (text.empty()) return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Status::config_invalid, std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) fail(Status::config_invalid, std::string(what) + ": not a JSON object");
  return j;
}

template <typename T>
void read_field(const json& j, const char* section, const char* key, T* out) {
  if (!j.contains(key)) return;
  try {
    *out = j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(section, std::string("bad value for \"") + key + "\"");
  }
}

IngestSection parse_ingest(const json& j) {
  check_keys(j, "ingest", {"decoder_command", "sample_every", "top_k", "sources"});
  IngestSection s;
  read_field(j, "ingest", "decoder_command", &s.decoder_command);
  read_field(j, "ingest", "sample_every", &s.sample_every);
  read_field(j, "ingest", "top_k", &s.top_k);
  if (j.contains("sources")) {
    if (!j.at("sources").is_array()) bad("ingest", "\"sources\" must be an array");
    for (const auto& sj : j.at("sources")) {
      if (!sj.is_object()) bad("ingest", "each source must be an object");
      check_keys(sj, "ingest source", {"video", "frames_dir", "class_label", "height_m"});
      IngestSource src;
      read_field(sj, "ingest source", "video", &src.video);
      read_field(sj, "ingest source", "frames_dir", &src.frames_dir);
      read_field(sj, "ingest source", "class_label", &src.class_label);
      read_field(sj, "ingest source", "height_m", &src.height_m);
      s.sources.push_back(std::move(src));
    }
  }
  return s;
}

SegmentationConfig parse_segmentation(const json& j) {
  check_keys(j, "segmentation",
             {"threshold_mode", "fixed_threshold", "min_area_px", "max_area_px",
              "padding_px", "invert"});
  SegmentationConfig c;
  if (j.contains("threshold_mode")) {
    const std::string mode = j.at("threshold_mode").is_string()
                                 ? j.at("threshold_mode").get<std::string>()
                                 : "";
    if (mode == "otsu") {
      c.threshold_mode = SegmentationConfig::ThresholdMode::otsu;
    } else if (mode == "fixed") {
      c.threshold_mode = SegmentationConfig::ThresholdMode::fixed;
    } else {
      bad("segmentation", "threshold_mode must be \"otsu\" or \"fixed\"");
    }
  }
  read_field(j, "segmentation", "fixed_threshold", &c.fixed_threshold);
  read_field(j, "segmentation", "min_area_px", &c.min_area_px);
  read_field(j, "segmentation", "max_area_px", &c.max_area_px);
  read_field(j, "segmentation", "padding_px", &c.padding_px);
  read_field(j, "segmentation", "invert", &c.invert);
  c.validate();
  return c;
}

AugmentationRanges parse_augmentation(const json& j) {
  check_keys(j, "augmentation",
             {"brightness_min", "brightness_max", "p_hflip", "p_vflip",
              "rotation_min", "rotation_max", "scale_min", "scale_max",
              "p_brightness", "p_rotation", "p_scale"});
  AugmentationRanges r;
  read_field(j, "augmentation", "brightness_min", &r.brightness_min);
  read_field(j, "augmentation", "brightness_max", &r.brightness_max);
  read_field(j, "augmentation", "p_hflip", &r.p_hflip);
  read_field(j, "augmentation", "p_vflip", &r.p_vflip);
  read_field(j, "augmentation", "rotation_min", &r.rotation_min);
  read_field(j, "augmentation", "rotation_max", &r.rotation_max);
  read_field(j, "augmentation", "scale_min", &r.scale_min);
  read_field(j, "augmentation", "scale_max", &r.scale_max);
  read_field(j, "augmentation", "p_brightness", &r.p_brightness);
  read_field(j, "augmentation", "p_rotation", &r.p_rotation);
  read_field(j, "augmentation", "p_scale", &r.p_scale);
  r.validate();
  return r;
}

SynthesisSection parse_synthesis(const json& j) {
  check_keys(j, "synthesis",
             {"images_per_class", "height_buckets", "height_weights", "min_seeds",
              "max_seeds", "max_overlap_iou", "pools_dir", "canvases_dir"});
  SynthesisSection s;
  read_field(j, "synthesis", "images_per_class", &s.config.images_per_class);
  read_field(j, "synthesis", "height_buckets", &s.config.height_buckets);
  read_field(j, "synthesis", "height_weights", &s.config.height_weights);
  read_field(j, "synthesis", "min_seeds", &s.config.min_seeds);
  read_field(j, "synthesis", "max_seeds", &s.config.max_seeds);
  read_field(j, "synthesis", "max_overlap_iou", &s.config.max_overlap_iou);
  read_field(j, "synthesis", "pools_dir", &s.pools_dir);
  read_field(j, "synthesis", "canvases_dir", &s.canvases_dir);
  s.config.validate();
  return s;
}

SplitSection parse_split(const json& j) {
  check_keys(j, "split", {"train_fraction"});
  SplitSection s;
  read_field(j, "split", "train_fraction", &s.train_fraction);
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) {
    bad("split", "train_fraction must be in (0, 1)");
  }
  return s;
}

HeadConfig parse_training(const json& j) {
  check_keys(j, "training",
             {"nodes_per_layer", "learning_rate", "decay", "dropout", "batch_size",
              "optimizer", "epochs"});
  HeadConfig c;
  if (j.contains("nodes_per_layer")) {
    const json& n = j.at("nodes_per_layer");
    if (n.is_number_integer()) {
      const int width = n.get<int>();
      c.nodes = {width, width, width};
    } else if (n.is_array() && n.size() == 3) {
      for (size_t i = 0; i < 3; ++i) {
        if (!n[i].is_number_integer()) bad("training", "nodes_per_layer entries must be integers");
        c.nodes[i] = n[i].get<int>();
      }
    } else {
      bad("training", "nodes_per_layer must be an integer or a 3-element array");
    }
  }
  read_field(j, "training", "learning_rate", &c.learning_rate);
  if (j.contains("decay") && !j.at("decay").is_null()) {
    const json& d = j.at("decay");
    if (!d.is_object()) bad("training", "\"decay\" must be an object or null");
    check_keys(d, "training decay", {"decay_steps", "decay_rate", "staircase"});
    DecaySchedule sched;
    read_field(d, "training decay", "decay_steps", &sched.decay_steps);
    read_field(d, "training decay", "decay_rate", &sched.decay_rate);
    read_field(d, "training decay", "staircase", &sched.staircase);
    c.decay = sched;
  }
  read_field(j, "training", "dropout", &c.dropout);
  read_field(j, "training", "batch_size", &c.batch_size);
  if (j.contains("optimizer")) {
    const std::string opt =
        j.at("optimizer").is_string() ? j.at("optimizer").get<std::string>() : "";
    if (opt == "adam") {
      c.optimizer = Optimizer::adam;
    } else if (opt == "sgd") {
      c.optimizer = Optimizer::sgd;
    } else {
      bad("training", "optimizer must be \"adam\" or \"sgd\"");
    }
  }
  read_field(j, "training", "epochs", &c.epochs);
  c.validate();
  return c;
}

EnsembleSection parse_ensemble(const json& j) {
  check_keys(j, "ensemble", {"weights"});
  EnsembleSection s;
  read_field(j, "ensemble", "weights", &s.weights);
  for (double w : s.weights) {
    if (!std::isfinite(w) || w < 0.0) {
      bad("ensemble", "weights must be finite and non-negative");
    }
  }
  return s;
}

}  // namespace

void GlobalConfig::validate() const {
  if (jobs < 0) fail(Status::config_invalid, "jobs must be >= 1 when given");
  if (ingest.sample_every < 1) fail(Status::config_invalid, "ingest: sample_every must be >= 1");
  if (ingest.top_k < 0) fail(Status::config_invalid, "ingest: top_k must be >= 0");
  bool any_video = false;
  for (const auto& src : ingest.sources) {
    const bool has_video = !src.video.empty();
    const bool has_frames = !src.frames_dir.empty();
    if (has_video == has_frames) {
      fail(Status::config_invalid,
           "ingest: each source needs exactly one of \"video\" or \"frames_dir\"");
    }
    if (src.class_label.empty()) {
      fail(Status::config_invalid, "ingest: source missing class_label");
    }
    if (!(src.height_m > 0.0)) {
      fail(Status::config_invalid, "ingest: source height_m must be > 0");
    }
    any_video = any_video || has_video;
  }
  if (any_video) {
    if (ingest.decoder_command.find("{input}") == std::string::npos ||
        ingest.decoder_command.find("{output_pattern}") == std::string::npos) {
      fail(Status::config_invalid,
           "ingest: decoder_command must contain {input} and {output_pattern}");
    }
  }
  if (!synthesis.pools_dir.empty() && !ingest.sources.empty()) {
    fail(Status::config_invalid,
         "synthesis.pools_dir and ingest.sources are mutually exclusive");
  }
  segmentation.validate();
  augmentation.validate();
  synthesis.config.validate();
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    fail(Status::config_invalid, "split: train_fraction must be in (0, 1)");
  }
  training.validate();
}

GlobalConfig parse_global_config(const std::string& json_text) {
  const json j = parse_object(json_text, "config");
  check_keys(j, "config",
             {"master_seed", "jobs", "ingest", "segmentation", "augmentation",
              "synthesis", "split", "training", "ensemble"});
  GlobalConfig cfg;
  read_field(j, "config", "master_seed", &cfg.master_seed);
  read_field(j, "config", "jobs", &cfg.jobs);
  if (j.contains("ingest")) cfg.ingest = parse_ingest(j.at("ingest"));
  if (j.contains("segmentation")) cfg.segmentation = parse_segmentation(j.at("segmentation"));
  if (j.contains("augmentation")) cfg.augmentation = parse_augmentation(j.at("augmentation"));
  if (j.contains("synthesis")) cfg.synthesis = parse_synthesis(j.at("synthesis"));
  if (j.contains("split")) cfg.split = parse_split(j.at("split"));
  if (j.contains("training")) cfg.training = parse_training(j.at("training"));
  if (j.contains("ensemble")) cfg.ensemble = parse_ensemble(j.at("ensemble"));
  cfg.validate();
  return cfg;
}

GlobalConfig load_global_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Status::io_error, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_global_config(buf.str());
}

SegmentationConfig parse_segmentation_json(const std::string& json_text) {
  return parse_segmentation(parse_object(json_text, "segmentation"));
}

AugmentationRanges parse_augmentation_json(const std::string& json_text) {
  return parse_augmentation(parse_object(json_text, "augmentation"));
}

SynthesisConfig parse_synthesis_json(const std::string& json_text) {
  return parse_synthesis(parse_object(json_text, "synthesis")).config;
}

HeadConfig parse_training_json(const std::string& json_text) {
  return parse_training(parse_object(json_text, "training"));
}

}  // namespace seedkit
