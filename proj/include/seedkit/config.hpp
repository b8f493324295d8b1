#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seedkit/augment.hpp"
#include "seedkit/classifier.hpp"
#include "seedkit/segment.hpp"
#include "seedkit/synth.hpp"

namespace seedkit {

// One capture input for the pipeline: either a video (decoded via the
// configured command) or a directory of ready frames, tagged with the class
// and capture height its seeds belong to.
struct IngestSource {
  std::string video;
  std::string frames_dir;
  std::string class_label;
  double height_m = 0.0;
};

struct IngestSection {
  std::string decoder_command;  // template with {input} and {output_pattern}
  int sample_every = 1;
  int top_k = 0;  // frames kept per source after focus ranking; 0 keeps all
  std::vector<IngestSource> sources;
};

struct SynthesisSection {
  SynthesisConfig config;
  // When pools_dir is set the pipeline starts from existing cutout pools and
  // the ingest/extract stages are skipped (sources must then be empty).
  std::string pools_dir;
  std::string canvases_dir;
};

struct SplitSection {
  double train_fraction = 0.8;
};

struct EnsembleSection {
  std::vector<double> weights;  // empty: equal weights
};

// The one JSON config file shared by every subcommand. Parsing is strict:
// unknown keys, wrong types, or any section failing its own validation raise
// ConfigInvalid before any work starts.
struct GlobalConfig {
  uint64_t master_seed = 0;
  int jobs = 0;  // 0: not set here (CLI flag or SEEDKIT_JOBS decide)
  IngestSection ingest;
  SegmentationConfig segmentation;
  AugmentationRanges augmentation;
  SynthesisSection synthesis;
  SplitSection split;
  HeadConfig training;  // num_classes/init_seed filled in at use site
  EnsembleSection ensemble;

  void validate() const;
};

GlobalConfig parse_global_config(const std::string& json_text);
GlobalConfig load_global_config(const std::filesystem::path& path);

// Section parsers for callers that carry one section as standalone JSON
// (flag-merged CLI sections travel through these). An empty string yields the
// defaults.
SegmentationConfig parse_segmentation_json(const std::string& json_text);
AugmentationRanges parse_augmentation_json(const std::string& json_text);
SynthesisConfig parse_synthesis_json(const std::string& json_text);
HeadConfig parse_training_json(const std::string& json_text);

}  // namespace seedkit
