#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace seedkit {

enum class Split { unassigned, train, val, test };
const char* split_name(Split s);
Split parse_split(const std::string& s);

struct ManifestRecord {
  std::string image_path;  // relative to the manifest's directory, '/' separators
  std::string class_label;
  double height_m = 0.0;
  Split split = Split::unassigned;
  uint64_t scene_seed = 0;
};

// Record-of-truth for a generated dataset. Serialized as CSV with header
// "path,class_label,height_m,split,scene_seed", preceded by exactly one
// comment line "# classes: <comma-separated class list in order>". Doubles
// are written in shortest round-trip form. Warnings are in-memory only.
struct DatasetManifest {
  std::vector<std::string> class_list;
  std::vector<ManifestRecord> records;
  std::vector<std::string> warnings;

  void validate() const;
  int64_t count_class(const std::string& cls) const;
  int64_t count_split(Split s) const;
};

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Stratified train/val assignment. Records are grouped by
// (class_label, height bucket); within each stratum a Fisher-Yates shuffle
// driven by hash64(split_seed, class_label, height in millimeters) picks the
// training records. Per class, the training total is round(train_fraction *
// class size), distributed over the class's height strata by largest
// remainder of train_fraction * stratum size, so a 333/333/334 class at 0.8
// splits exactly 800/200. Strata left with zero train or zero val records add
// a warning to the manifest.
void split_dataset(DatasetManifest& m, double train_fraction, uint64_t split_seed);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
double parse_double(const std::string& s);
uint64_t parse_u64(const std::string& s);

}  // namespace seedkit
