#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace seedkit {

// One model's class-probability vector for one image; image_id is the
// manifest image path.
struct SoftmaxRecord {
  std::string image_id;
  std::vector<double> probs;
};

// Exchange format shared by the baseline and any external model: JSON Lines,
// first line {"class_list": [...]}, then one {"image_id": ..., "probs":
// [...]} per record. Combined ensemble files use the same layout but carry
// unnormalized sums.
struct SoftmaxFile {
  std::vector<std::string> class_list;
  std::vector<SoftmaxRecord> records;
};

void write_softmax_file(const SoftmaxFile& file, const std::filesystem::path& path);

// Reads and validates: parse failures and missing keys raise IoError; a
// probs length differing from the class list, non-finite values, or (with
// require_normalized) values outside [0,1] or a sum off 1 by more than 1e-6
// raise NumericError. Duplicate image ids raise AlignmentError.
SoftmaxFile read_softmax_file(const std::filesystem::path& path,
                              bool require_normalized = true);

}  // namespace seedkit
