#pragma once

#include <filesystem>
#include <string>

#include "seedkit/config.hpp"
#include "seedkit/metrics.hpp"

namespace seedkit {

struct PipelineResult {
  std::filesystem::path run_dir;
  MetricsReport metrics;
  std::string summary_json;  // artifact paths, stage list, final metrics
};

// Runs the full workflow under a fresh run directory
// <out_root>/run_<UTC timestamp>_<master_seed> (suffixed when taken — run
// directories are append-only, reruns never overwrite). Stages, in order:
// ingest, extract (both skipped when synthesis.pools_dir is set), synth,
// split, train-baseline, predict (val split), eval. Every artifact lands
// under the run directory and survives a failing later stage; a stage error
// is rethrown with the stage name in the message. summary.json is written
// last. All seeds derive from cfg.master_seed: scenes through the synthesis
// stage, the split as hash64(master_seed, "split"), training as
// hash64(master_seed, "train").
PipelineResult run_pipeline(const GlobalConfig& cfg,
                            const std::filesystem::path& out_root, int jobs);

}  // namespace seedkit
