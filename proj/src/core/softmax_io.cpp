#include "seedkit/softmax_io.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "seedkit/error.hpp"

namespace seedkit {

using nlohmann::json;

void write_softmax_file(const SoftmaxFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Status::io_error, "cannot write " + path.string());
  out << json{{"class_list", file.class_list}}.dump() << '\n';
  for (const auto& rec : file.records) {
    out << json{{"image_id", rec.image_id}, {"probs", rec.probs}}.dump() << '\n';
  }
  if (!out) fail(Status::io_error, "failed writing " + path.string());
}

SoftmaxFile read_softmax_file(const std::filesystem::path& path,
                              bool require_normalized) {
  std::ifstream in(path);
  if (!in) fail(Status::io_error, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    fail(Status::io_error, path.string() + " is empty (missing header line)");
  }
  SoftmaxFile file;
  try {
    const json header = json::parse(line);
    file.class_list = header.at("class_list").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(Status::io_error, path.string() + ": bad header line: " + e.what());
  }
  if (file.class_list.empty()) {
    fail(Status::io_error, path.string() + ": empty class list");
  }

  std::unordered_set<std::string> seen;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    SoftmaxRecord rec;
    try {
      const json j = json::parse(line);
      rec.image_id = j.at("image_id").get<std::string>();
      rec.probs = j.at("probs").get<std::vector<double>>();
    } catch (const json::exception& e) {
      fail(Status::io_error, path.string() + " line " + std::to_string(line_no) +
                                 ": " + e.what());
    }
    const std::string where =
        path.string() + " line " + std::to_string(line_no) + " (" + rec.image_id + ")";
    if (rec.probs.size() != file.class_list.size()) {
      fail(Status::numeric_error,
           where + ": " + std::to_string(rec.probs.size()) + " probs for " +
               std::to_string(file.class_list.size()) + " classes");
    }
    double sum = 0.0;
    for (double p : rec.probs) {
      if (!std::isfinite(p)) fail(Status::numeric_error, where + ": non-finite value");
      if (require_normalized && (p < 0.0 || p > 1.0)) {
        fail(Status::numeric_error, where + ": probability outside [0, 1]");
      }
      sum += p;
    }
    if (require_normalized && std::abs(sum - 1.0) > 1e-6) {
      fail(Status::numeric_error, where + ": probabilities sum to " + std::to_string(sum));
    }
    if (!seen.insert(rec.image_id).second) {
      fail(Status::alignment_error, where + ": duplicate image id");
    }
    file.records.push_back(std::move(rec));
  }
  return file;
}

}  // namespace seedkit
