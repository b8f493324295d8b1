#include "seedkit/segment.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "seedkit/error.hpp"
#include "seedkit/png_io.hpp"

namespace seedkit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kIndexName = "pool_index.jsonl";

}  // namespace

void SegmentationConfig::validate() const {
  if (min_area_px > max_area_px) {
    fail(Status::config_invalid, "min_area_px exceeds max_area_px");
  }
  if (min_area_px < 0 || padding_px < 0) {
    fail(Status::config_invalid, "negative segmentation parameter");
  }
  if (fixed_threshold < 0 || fixed_threshold > 255) {
    fail(Status::config_invalid, "fixed_threshold outside [0, 255]");
  }
}

int otsu_threshold(const std::array<uint64_t, 256>& histogram) {
  uint64_t total = 0;
  double weighted_sum = 0.0;
  for (int i = 0; i < 256; ++i) {
    total += histogram[i];
    weighted_sum += double(i) * double(histogram[i]);
  }
  if (total == 0) return 0;

  int best_t = 0;
  double best_var = -1.0;
  uint64_t w0 = 0;
  double sum0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    w0 += histogram[t];
    if (w0 == 0) continue;
    const uint64_t w1 = total - w0;
    if (w1 == 0) break;
    sum0 += double(t) * double(histogram[t]);
    const double mu0 = sum0 / double(w0);
    const double mu1 = (weighted_sum - sum0) / double(w1);
    const double var = double(w0) * double(w1) * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return best_t;
}

std::vector<SeedCutout> segment_frame(const Frame& frame,
                                      const SegmentationConfig& cfg,
                                      const std::string& class_label,
                                      double capture_height_m) {
  cfg.validate();
  const ImageRGB8& img = frame.pixels;
  if (img.empty()) fail(Status::shape_error, "empty frame");
  const int w = img.width, h = img.height;

  std::vector<uint8_t> gray(size_t(w) * h);
  std::array<uint64_t, 256> hist{};
  for (size_t i = 0; i < gray.size(); ++i) {
    const uint8_t* p = img.data.data() + 3 * i;
    gray[i] = gray_u8(p[0], p[1], p[2]);
    ++hist[gray[i]];
  }

  const int t = cfg.threshold_mode == SegmentationConfig::ThresholdMode::otsu
                    ? otsu_threshold(hist)
                    : cfg.fixed_threshold;
  std::vector<uint8_t> fg(gray.size());
  for (size_t i = 0; i < gray.size(); ++i) {
    fg[i] = cfg.invert ? (gray[i] <= t) : (gray[i] > t);
  }

  // 8-connected component labeling, flood fill in raster-scan order.
  std::vector<int32_t> label(fg.size(), -1);
  std::vector<SeedCutout> cutouts;
  std::vector<size_t> stack;
  int32_t next_label = 0;
  for (size_t start = 0; start < fg.size(); ++start) {
    if (!fg[start] || label[start] >= 0) continue;
    const int32_t id = next_label++;
    stack.assign(1, start);
    label[start] = id;
    std::vector<size_t> members;
    while (!stack.empty()) {
      const size_t cur = stack.back();
      stack.pop_back();
      members.push_back(cur);
      const int cx = int(cur % w), cy = int(cur / w);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = cx + dx, ny = cy + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const size_t ni = size_t(ny) * w + nx;
          if (fg[ni] && label[ni] < 0) {
            label[ni] = id;
            stack.push_back(ni);
          }
        }
      }
    }

    const int64_t area = int64_t(members.size());
    if (area < cfg.min_area_px || area > cfg.max_area_px) continue;

    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (size_t m : members) {
      const int mx = int(m % w), my = int(m / w);
      x0 = std::min(x0, mx);
      y0 = std::min(y0, my);
      x1 = std::max(x1, mx);
      y1 = std::max(y1, my);
    }
    const int px0 = std::max(0, x0 - cfg.padding_px);
    const int py0 = std::max(0, y0 - cfg.padding_px);
    const int px1 = std::min(w - 1, x1 + cfg.padding_px);
    const int py1 = std::min(h - 1, y1 + cfg.padding_px);

    SeedCutout cut;
    cut.id = frame.id + "_s" + std::to_string(cutouts.size());
    cut.class_label = class_label;
    cut.capture_height_m = capture_height_m;
    cut.source_frame = frame.source;
    cut.pixels = ImageRGBA8(px1 - px0 + 1, py1 - py0 + 1);
    for (int y = py0; y <= py1; ++y) {
      for (int x = px0; x <= px1; ++x) {
        const uint8_t* src = img.px(x, y);
        uint8_t* dst = cut.pixels.px(x - px0, y - py0);
        dst[0] = src[0];
        dst[1] = src[1];
        dst[2] = src[2];
        dst[3] = label[size_t(y) * w + x] == id ? 255 : 0;
      }
    }
    cut.area_px = area;
    cutouts.push_back(std::move(cut));
  }
  return cutouts;
}

std::filesystem::path write_cutout_pool(const std::vector<SeedCutout>& cutouts,
                                        const fs::path& dir, bool append) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    fail(Status::io_error, "cannot create pool directory: " + dir.string());
  }
  const fs::path index = dir / kIndexName;
  std::ofstream out(index, append ? std::ios::app : std::ios::trunc);
  if (!out) fail(Status::io_error, "cannot write pool index: " + index.string());
  for (const auto& cut : cutouts) {
    const std::string file = cut.id + ".png";
    write_png(dir / file, cut.pixels);
    json rec = {{"id", cut.id},
                {"file", file},
                {"class_label", cut.class_label},
                {"capture_height_m", cut.capture_height_m},
                {"area_px", cut.area_px}};
    out << rec.dump() << "\n";
  }
  if (!out) fail(Status::io_error, "write failed: " + index.string());
  return index;
}

std::vector<SeedCutout> read_cutout_pool(const fs::path& index_file) {
  std::ifstream in(index_file);
  if (!in) fail(Status::io_error, "cannot open pool index: " + index_file.string());
  const fs::path dir = index_file.parent_path();

  std::vector<SeedCutout> cutouts;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
      SeedCutout cut;
      cut.id = rec.at("id").get<std::string>();
      const std::string file = rec.at("file").get<std::string>();
      cut.class_label = rec.at("class_label").get<std::string>();
      cut.capture_height_m = rec.at("capture_height_m").get<double>();
      cut.area_px = rec.at("area_px").get<int64_t>();
      const fs::path png = dir / file;
      if (!fs::exists(png)) {
        fail(Status::missing_asset, "pool asset missing: " + png.string());
      }
      cut.pixels = read_png_rgba(png);
      const int64_t actual = opaque_area(cut.pixels);
      if (actual != cut.area_px) {
        fail(Status::corrupt_pool,
             "area mismatch for " + cut.id + ": index says " +
                 std::to_string(cut.area_px) + ", PNG has " +
                 std::to_string(actual));
      }
      cutouts.push_back(std::move(cut));
    } catch (const json::exception& e) {
      fail(Status::corrupt_pool, index_file.string() + ":" +
                                     std::to_string(line_no) + ": " + e.what());
    }
  }

  // Placements reference cutouts by id, so ids must be unambiguous.
  std::vector<std::string> ids;
  ids.reserve(cutouts.size());
  for (const auto& c : cutouts) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    fail(Status::corrupt_pool, "duplicate cutout id in " + index_file.string());
  }
  return cutouts;
}

}  // namespace seedkit
