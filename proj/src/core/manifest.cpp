#include "seedkit/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "seedkit/error.hpp"
#include "seedkit/rng.hpp"

namespace seedkit {
namespace {

namespace fs = std::filesystem;

void check_field(const std::string& s, const char* what) {
  if (s.empty()) fail(Status::manifest_invalid, std::string(what) + " is empty");
  if (s.find_first_of(",\r\n") != std::string::npos || s.front() == '#') {
    fail(Status::manifest_invalid,
         std::string(what) + " contains a reserved character: " + s);
  }
}

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

int64_t height_mm(double h) { return int64_t(std::llround(h * 1000.0)); }

}  // namespace

const char* split_name(Split s) {
  switch (s) {
    case Split::unassigned: return "unassigned";
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "unassigned";
}

Split parse_split(const std::string& s) {
  if (s == "unassigned") return Split::unassigned;
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  fail(Status::manifest_invalid, "unknown split: " + s);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail(Status::manifest_invalid, "malformed number: " + s);
  }
  return v;
}

uint64_t parse_u64(const std::string& s) {
  uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail(Status::manifest_invalid, "malformed integer: " + s);
  }
  return v;
}

void DatasetManifest::validate() const {
  std::set<std::string> seen;
  for (const auto& cls : class_list) {
    check_field(cls, "class label");
    if (!seen.insert(cls).second) {
      fail(Status::manifest_invalid, "duplicate class in class list: " + cls);
    }
  }
  for (const auto& rec : records) {
    check_field(rec.image_path, "image path");
    if (!seen.count(rec.class_label)) {
      fail(Status::manifest_invalid,
           "record class not in class list: " + rec.class_label);
    }
  }
}

int64_t DatasetManifest::count_class(const std::string& cls) const {
  return std::count_if(records.begin(), records.end(),
                       [&](const ManifestRecord& r) { return r.class_label == cls; });
}

int64_t DatasetManifest::count_split(Split s) const {
  return std::count_if(records.begin(), records.end(),
                       [&](const ManifestRecord& r) { return r.split == s; });
}

void write_manifest(const DatasetManifest& m, const fs::path& path) {
  m.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Status::io_error, "cannot write manifest: " + path.string());
  out << "# classes: ";
  for (size_t i = 0; i < m.class_list.size(); ++i) {
    out << (i ? "," : "") << m.class_list[i];
  }
  out << "\npath,class_label,height_m,split,scene_seed\n";
  for (const auto& rec : m.records) {
    out << rec.image_path << ',' << rec.class_label << ','
        << format_double(rec.height_m) << ',' << split_name(rec.split) << ','
        << rec.scene_seed << '\n';
  }
  if (!out) fail(Status::io_error, "write failed: " + path.string());
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Status::io_error, "cannot open manifest: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("# classes: ", 0) != 0) {
    fail(Status::manifest_invalid, "missing '# classes:' line in " + path.string());
  }
  DatasetManifest m;
  for (auto& cls : split_line(line.substr(11), ',')) {
    if (!cls.empty()) m.class_list.push_back(cls);
  }
  if (!std::getline(in, line) ||
      line != "path,class_label,height_m,split,scene_seed") {
    fail(Status::manifest_invalid, "bad manifest header in " + path.string());
  }
  size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_line(line, ',');
    if (fields.size() != 5) {
      fail(Status::manifest_invalid, path.string() + ":" +
                                         std::to_string(line_no) +
                                         ": expected 5 fields");
    }
    ManifestRecord rec;
    rec.image_path = fields[0];
    rec.class_label = fields[1];
    rec.height_m = parse_double(fields[2]);
    rec.split = parse_split(fields[3]);
    rec.scene_seed = parse_u64(fields[4]);
    m.records.push_back(std::move(rec));
  }
  m.validate();
  return m;
}

void split_dataset(DatasetManifest& m, double train_fraction, uint64_t split_seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(Status::config_invalid, "train_fraction must be in (0, 1)");
  }
  m.validate();

  struct Stratum {
    std::string cls;
    int64_t mm = 0;
    std::vector<size_t> idx;
  };
  // Strata keyed by (class, height), kept in first-appearance order.
  std::vector<Stratum> strata;
  std::map<std::pair<std::string, int64_t>, size_t> pos;
  for (size_t i = 0; i < m.records.size(); ++i) {
    const auto key = std::make_pair(m.records[i].class_label,
                                    height_mm(m.records[i].height_m));
    auto it = pos.find(key);
    if (it == pos.end()) {
      it = pos.emplace(key, strata.size()).first;
      strata.push_back({key.first, key.second, {}});
    }
    strata[it->second].idx.push_back(i);
  }

  for (const auto& cls : m.class_list) {
    std::vector<size_t> cls_strata;
    int64_t n_class = 0;
    for (size_t s = 0; s < strata.size(); ++s) {
      if (strata[s].cls == cls) {
        cls_strata.push_back(s);
        n_class += int64_t(strata[s].idx.size());
      }
    }
    if (n_class == 0) continue;
    const int64_t target = std::llround(train_fraction * double(n_class));

    // Floor each stratum's quota, then hand out the remainder to the largest
    // fractional parts (earlier stratum wins ties).
    std::vector<int64_t> quota(cls_strata.size());
    std::vector<double> frac(cls_strata.size());
    int64_t assigned = 0;
    for (size_t j = 0; j < cls_strata.size(); ++j) {
      const double exact =
          train_fraction * double(strata[cls_strata[j]].idx.size());
      quota[j] = int64_t(std::floor(exact));
      frac[j] = exact - double(quota[j]);
      assigned += quota[j];
    }
    std::vector<size_t> order(cls_strata.size());
    for (size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return frac[a] > frac[b]; });
    for (size_t j = 0; assigned < target && j < order.size(); ++j, ++assigned) {
      ++quota[order[j]];
    }

    for (size_t j = 0; j < cls_strata.size(); ++j) {
      Stratum& st = strata[cls_strata[j]];
      std::vector<size_t> shuffled = st.idx;
      Rng rng(hash64(split_seed, st.cls, uint64_t(st.mm)));
      for (size_t k = shuffled.size(); k > 1; --k) {
        std::swap(shuffled[k - 1], shuffled[rng.next_below(k)]);
      }
      const size_t n_train = size_t(std::clamp<int64_t>(quota[j], 0,
                                                        int64_t(shuffled.size())));
      for (size_t k = 0; k < shuffled.size(); ++k) {
        m.records[shuffled[k]].split = k < n_train ? Split::train : Split::val;
      }
      if (!st.idx.empty() && (n_train == 0 || n_train == st.idx.size())) {
        m.warnings.push_back("stratum " + st.cls + "@" +
                             format_double(double(st.mm) / 1000.0) + "m has " +
                             (n_train == 0 ? "no train" : "no val") +
                             " records");
      }
    }
  }
}

}  // namespace seedkit
