#include <fstream>
#include <sstream>

#include "doctest.h"
#include "seedkit/error.hpp"
#include "seedkit/png_io.hpp"
#include "seedkit/rng.hpp"
#include "seedkit/segment.hpp"
#include "test_util.hpp"

using namespace seedkit;
namespace fs = std::filesystem;

namespace {

struct Disk {
  int cx, cy, r;
};

// Frame with bright disks on dark noise, plus the exact pixel count of each
// disk under the membership rule dx^2 + dy^2 <= r^2.
Frame make_disk_frame(const std::vector<Disk>& disks, int w, int h, uint64_t seed,
                      std::vector<int64_t>* areas = nullptr) {
  ImageRGB8 img = testutil::make_noise_canvas(w, h, seed, 20, 8);
  if (areas) areas->assign(disks.size(), 0);
  for (size_t d = 0; d < disks.size(); ++d) {
    const auto& disk = disks[d];
    for (int y = disk.cy - disk.r; y <= disk.cy + disk.r; ++y) {
      for (int x = disk.cx - disk.r; x <= disk.cx + disk.r; ++x) {
        const int dx = x - disk.cx, dy = y - disk.cy;
        if (dx * dx + dy * dy <= disk.r * disk.r) {
          uint8_t* px = img.px(x, y);
          px[0] = 210;
          px[1] = 205;
          px[2] = 190;
          if (areas) ++(*areas)[d];
        }
      }
    }
  }
  Frame f;
  f.id = "frame0";
  f.pixels = std::move(img);
  f.source = "synthetic";
  return f;
}

// Otsu oracle: scan every threshold, maximize between-class variance the
// slow, obvious way.
int ref_otsu(const std::array<uint64_t, 256>& hist) {
  double total = 0.0, total_sum = 0.0;
  for (int i = 0; i < 256; ++i) {
    total += double(hist[size_t(i)]);
    total_sum += double(i) * double(hist[size_t(i)]);
  }
  int best_t = 0;
  double best_var = -1.0;
  for (int t = 0; t < 256; ++t) {
    double w0 = 0.0, sum0 = 0.0;
    for (int i = 0; i <= t; ++i) {
      w0 += double(hist[size_t(i)]);
      sum0 += double(i) * double(hist[size_t(i)]);
    }
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) {
      if (best_var < 0.0) best_var = 0.0;  // keep lowest t on all-degenerate
      continue;
    }
    const double mu0 = sum0 / w0;
    const double mu1 = (total_sum - sum0) / w1;
    const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace

TEST_CASE("otsu matches the exhaustive oracle on random histograms") {
  Rng rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<uint64_t, 256> hist{};
    // Two random lobes plus noise, so there is usually a meaningful valley.
    const int lo = int(rng.next_below(100));
    const int hi = 130 + int(rng.next_below(100));
    for (int i = 0; i < 256; ++i) hist[size_t(i)] = rng.next_below(5);
    for (int k = 0; k < 1000; ++k) {
      const int offset = int(rng.next_below(31)) - 15;
      const int a = std::clamp(lo + offset, 0, 255);
      const int b = std::clamp(hi + offset, 0, 255);
      hist[size_t(a)] += 3;
      hist[size_t(b)] += 2;
    }
    CHECK(otsu_threshold(hist) == ref_otsu(hist));
  }
}

TEST_CASE("otsu degenerate histograms resolve to the lowest threshold") {
  std::array<uint64_t, 256> hist{};
  hist[180] = 500;  // single bin: every split is equally (zero) good
  CHECK(otsu_threshold(hist) == 0);
  std::array<uint64_t, 256> empty{};
  CHECK(otsu_threshold(empty) == 0);
}

TEST_CASE("segment_frame finds every disk with the right area") {
  std::vector<Disk> disks;
  Rng rng(88);
  // 30 disks on a grid, jittered, never touching.
  for (int gy = 0; gy < 5; ++gy) {
    for (int gx = 0; gx < 6; ++gx) {
      disks.push_back({40 + gx * 70 + int(rng.next_below(10)),
                       40 + gy * 70 + int(rng.next_below(10)),
                       8 + int(rng.next_below(7))});
    }
  }
  std::vector<int64_t> areas;
  const Frame frame = make_disk_frame(disks, 460, 390, 1, &areas);

  SegmentationConfig cfg;
  const auto cutouts = segment_frame(frame, cfg, "barley", 0.3);
  REQUIRE(cutouts.size() == 30);

  int64_t oracle_total = 0, found_total = 0;
  for (int64_t a : areas) oracle_total += a;
  for (const auto& c : cutouts) {
    CHECK(c.class_label == "barley");
    CHECK(c.capture_height_m == 0.3);
    CHECK(c.source_frame == frame.source);
    CHECK(c.area_px == opaque_area(c.pixels));
    found_total += c.area_px;
  }
  // Component areas match the geometric membership count within 2%.
  CHECK(std::abs(double(found_total - oracle_total)) <
        0.02 * double(oracle_total));
  // Ids follow the frame id.
  CHECK(cutouts[0].id.rfind("frame0_s", 0) == 0);
}

TEST_CASE("segmentation is translation equivariant") {
  const Disk a{60, 60, 11};
  const Disk b{140, 95, 11};
  // Flat background so position is the only difference.
  Frame f;
  f.id = "t";
  f.pixels = ImageRGB8(220, 160, 20);
  std::vector<int64_t> areas;
  for (const auto& d : {a, b}) {
    for (int y = d.cy - d.r; y <= d.cy + d.r; ++y) {
      for (int x = d.cx - d.r; x <= d.cx + d.r; ++x) {
        const int dx = x - d.cx, dy = y - d.cy;
        if (dx * dx + dy * dy <= d.r * d.r) {
          uint8_t* px = f.pixels.px(x, y);
          px[0] = px[1] = px[2] = 200;
        }
      }
    }
  }
  SegmentationConfig cfg;
  cfg.threshold_mode = SegmentationConfig::ThresholdMode::fixed;
  cfg.fixed_threshold = 100;
  const auto cutouts = segment_frame(f, cfg, "c", 0.3);
  REQUIRE(cutouts.size() == 2);
  CHECK(cutouts[0].pixels == cutouts[1].pixels);
}

TEST_CASE("area filters and inversion") {
  std::vector<Disk> disks = {{40, 40, 4}, {120, 40, 10}, {200, 40, 16}};
  const Frame frame = make_disk_frame(disks, 260, 90, 2);

  SegmentationConfig cfg;
  cfg.min_area_px = 100;  // drops the r=4 disk (~49 px)
  cfg.max_area_px = 500;  // drops the r=16 disk (~804 px)
  const auto cutouts = segment_frame(frame, cfg, "c", 0.3);
  REQUIRE(cutouts.size() == 1);
  CHECK(cutouts[0].area_px > 250);
  CHECK(cutouts[0].area_px < 400);

  // Dark seeds on a bright field need invert.
  Frame inv;
  inv.id = "inv";
  inv.pixels = ImageRGB8(120, 80, 230);
  for (int y = 30; y < 50; ++y) {
    for (int x = 40; x < 70; ++x) {
      uint8_t* px = inv.pixels.px(x, y);
      px[0] = px[1] = px[2] = 25;
    }
  }
  SegmentationConfig icfg;
  // Without invert the bright field itself is the one component found.
  const auto wrong = segment_frame(inv, icfg, "c", 0.3);
  REQUIRE(wrong.size() == 1);
  CHECK(wrong[0].area_px == 120 * 80 - 20 * 30);
  icfg.invert = true;
  const auto dark = segment_frame(inv, icfg, "c", 0.3);
  REQUIRE(dark.size() == 1);
  CHECK(dark[0].area_px == 20 * 30);
}

TEST_CASE("components are 8-connected") {
  Frame f;
  f.id = "diag";
  f.pixels = ImageRGB8(20, 20, 0);
  // Two pixels touching only at a corner.
  for (auto [x, y] : {std::pair{8, 8}, std::pair{9, 9}}) {
    uint8_t* px = f.pixels.px(x, y);
    px[0] = px[1] = px[2] = 255;
  }
  SegmentationConfig cfg;
  cfg.threshold_mode = SegmentationConfig::ThresholdMode::fixed;
  cfg.fixed_threshold = 128;
  cfg.min_area_px = 1;
  const auto cutouts = segment_frame(f, cfg, "c", 0.3);
  REQUIRE(cutouts.size() == 1);
  CHECK(cutouts[0].area_px == 2);
}

TEST_CASE("padding adds clamped transparent margin") {
  std::vector<Disk> disks = {{30, 30, 8}};
  const Frame frame = make_disk_frame(disks, 80, 64, 3);
  SegmentationConfig plain;
  SegmentationConfig padded;
  padded.padding_px = 4;
  const auto a = segment_frame(frame, plain, "c", 0.3)[0];
  const auto b = segment_frame(frame, padded, "c", 0.3)[0];
  CHECK(b.pixels.width == a.pixels.width + 8);
  CHECK(b.pixels.height == a.pixels.height + 8);
  CHECK(b.area_px == a.area_px);
  // The margin really is transparent.
  for (int x = 0; x < b.pixels.width; ++x) {
    CHECK(b.pixels.alpha(x, 0) == 0);
    CHECK(b.pixels.alpha(x, b.pixels.height - 1) == 0);
  }
}

TEST_CASE("cutout alpha is strictly binary") {
  std::vector<Disk> disks = {{40, 40, 12}};
  const Frame frame = make_disk_frame(disks, 90, 90, 4);
  const auto cut = segment_frame(frame, SegmentationConfig{}, "c", 0.3)[0];
  for (int y = 0; y < cut.pixels.height; ++y) {
    for (int x = 0; x < cut.pixels.width; ++x) {
      const uint8_t a = cut.pixels.alpha(x, y);
      REQUIRE((a == 0 || a == 255));
    }
  }
}

TEST_CASE("cutout pools round-trip through disk") {
  testutil::TempDir tmp("pool");
  std::vector<SeedCutout> cuts;
  for (int i = 0; i < 5; ++i) {
    cuts.push_back(testutil::make_disk_cutout("cut" + std::to_string(i), 5 + i,
                                              uint8_t(100 + i * 20), 80, 60));
  }
  const fs::path index = write_cutout_pool(cuts, tmp.path / "p");
  CHECK(index.filename() == "pool_index.jsonl");
  const auto back = read_cutout_pool(index);
  REQUIRE(back.size() == cuts.size());
  for (size_t i = 0; i < cuts.size(); ++i) {
    CHECK(back[i].id == cuts[i].id);
    CHECK(back[i].class_label == cuts[i].class_label);
    CHECK(back[i].capture_height_m == cuts[i].capture_height_m);
    CHECK(back[i].area_px == cuts[i].area_px);
    CHECK(back[i].pixels == cuts[i].pixels);
  }
}

TEST_CASE("append extends an existing pool in order") {
  testutil::TempDir tmp("poolappend");
  std::vector<SeedCutout> first = {testutil::make_disk_cutout("a", 5, 200, 10, 10),
                                   testutil::make_disk_cutout("b", 6, 200, 10, 10)};
  std::vector<SeedCutout> second = {testutil::make_disk_cutout("c", 7, 200, 10, 10)};
  const fs::path index = write_cutout_pool(first, tmp.path / "p");
  write_cutout_pool(second, tmp.path / "p", true);
  const auto back = read_cutout_pool(index);
  REQUIRE(back.size() == 3);
  CHECK(back[0].id == "a");
  CHECK(back[1].id == "b");
  CHECK(back[2].id == "c");
}

TEST_CASE("pool corruption is caught on read") {
  testutil::TempDir tmp("poolbad");
  std::vector<SeedCutout> cuts = {testutil::make_disk_cutout("x", 6, 150, 150, 150),
                                  testutil::make_disk_cutout("y", 8, 150, 150, 150)};
  const fs::path index = write_cutout_pool(cuts, tmp.path / "p");

  SUBCASE("tampered area") {
    std::ifstream in(index);
    std::stringstream fixed;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (first) {
        const auto pos = line.find("\"area_px\":");
        REQUIRE(pos != std::string::npos);
        line.replace(pos, 11, "\"area_px\":9");
        first = false;
      }
      fixed << line << "\n";
    }
    in.close();
    testutil::write_file_bytes(index, fixed.str());
    CHECK(testutil::thrown_status([&] { read_cutout_pool(index); }) ==
          Status::corrupt_pool);
  }

  SUBCASE("missing png") {
    fs::remove(tmp.path / "p" / "y.png");
    CHECK(testutil::thrown_status([&] { read_cutout_pool(index); }) ==
          Status::missing_asset);
  }

  SUBCASE("duplicate ids") {
    write_cutout_pool(cuts, tmp.path / "p", true);  // same ids again
    CHECK(testutil::thrown_status([&] { read_cutout_pool(index); }) ==
          Status::corrupt_pool);
  }

  SUBCASE("garbage index line") {
    std::ofstream out(index, std::ios::app);
    out << "{not json\n";
    out.close();
    CHECK(testutil::thrown_status([&] { read_cutout_pool(index); }) ==
          Status::corrupt_pool);
  }
}

TEST_CASE("segmentation config validates") {
  SegmentationConfig cfg;
  cfg.min_area_px = -1;
  CHECK(testutil::thrown_status([&] { cfg.validate(); }) == Status::config_invalid);
  cfg = SegmentationConfig{};
  cfg.max_area_px = 4;
  cfg.min_area_px = 10;
  CHECK(testutil::thrown_status([&] { cfg.validate(); }) == Status::config_invalid);
  cfg = SegmentationConfig{};
  cfg.fixed_threshold = 300;
  CHECK(testutil::thrown_status([&] { cfg.validate(); }) == Status::config_invalid);
}
