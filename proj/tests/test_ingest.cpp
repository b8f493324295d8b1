#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "seedkit/error.hpp"
#include "seedkit/ingest.hpp"
#include "seedkit/png_io.hpp"
#include "test_util.hpp"

using namespace seedkit;
namespace fs = std::filesystem;

namespace {

std::string decoder_template() {
  return std::string(SEEDKIT_FAKE_DECODER) + " {input} {output_pattern}";
}

fs::path write_fake_video(const fs::path& dir, int frames, int w, int h,
                          const std::string& mode = "") {
  const fs::path video = dir / "capture.fv";
  std::ofstream out(video);
  out << frames << " " << w << " " << h;
  if (!mode.empty()) out << " " << mode;
  out << "\n";
  return video;
}

// Population variance of the 4-neighbor Laplacian of the grayscale image,
// written as plain double loops: the oracle for focus_score.
double ref_focus(const ImageRGB8& img) {
  if (img.width < 3 || img.height < 3) return 0.0;
  auto g = [&](int x, int y) {
    const uint8_t* px = img.px(x, y);
    return gray_value(px[0], px[1], px[2]);
  };
  std::vector<double> lap;
  for (int y = 1; y + 1 < img.height; ++y) {
    for (int x = 1; x + 1 < img.width; ++x) {
      lap.push_back(g(x - 1, y) + g(x + 1, y) + g(x, y - 1) + g(x, y + 1) -
                    4.0 * g(x, y));
    }
  }
  double mean = 0.0;
  for (double v : lap) mean += v;
  mean /= double(lap.size());
  double var = 0.0;
  for (double v : lap) var += (v - mean) * (v - mean);
  return var / double(lap.size());
}

ImageRGB8 box_blur3(const ImageRGB8& img) {
  ImageRGB8 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      int sum[3] = {0, 0, 0}, n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height) continue;
          const uint8_t* px = img.px(xx, yy);
          sum[0] += px[0];
          sum[1] += px[1];
          sum[2] += px[2];
          ++n;
        }
      }
      uint8_t* po = out.px(x, y);
      po[0] = uint8_t(sum[0] / n);
      po[1] = uint8_t(sum[1] / n);
      po[2] = uint8_t(sum[2] / n);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("decode_video keeps every nth frame and deletes the rest") {
  testutil::TempDir tmp("decode");
  const fs::path video = write_fake_video(tmp.path, 300, 48, 36);
  const fs::path out = tmp.path / "frames";
  const FrameSet set = decode_video(video, decoder_template(), out, 30);
  REQUIRE(set.frames.size() == 10);
  // Kept indices 0, 30, ..., 270, in order.
  CHECK(set.frames.front().id == "frame_000000");
  CHECK(set.frames[1].id == "frame_000030");
  CHECK(set.frames.back().id == "frame_000270");
  // The skipped files are really gone.
  size_t on_disk = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().extension() == ".png") ++on_disk;
  }
  CHECK(on_disk == 10);
  CHECK(set.metadata.count("command") == 1);
  // Pixels came through the decoder unchanged.
  CHECK(set.frames[0].pixels.width == 48);
  CHECK(set.frames[0].pixels.height == 36);
}

TEST_CASE("decode_video with sample_every 1 keeps everything") {
  testutil::TempDir tmp("decodeall");
  const fs::path video = write_fake_video(tmp.path, 12, 32, 24);
  const FrameSet set = decode_video(video, decoder_template(), tmp.path / "f", 1);
  CHECK(set.frames.size() == 12);
}

TEST_CASE("decode_video failure modes") {
  testutil::TempDir tmp("decodebad");
  // Decoder exits nonzero.
  const fs::path crash = write_fake_video(tmp.path, 5, 32, 24, "crash");
  CHECK(testutil::thrown_status([&] {
          decode_video(crash, decoder_template(), tmp.path / "a", 1);
        }) == Status::decode_failed);
  // Decoder runs fine but emits nothing.
  const fs::path empty = write_fake_video(tmp.path, 0, 32, 24);
  CHECK(testutil::thrown_status([&] {
          decode_video(empty, decoder_template(), tmp.path / "b", 1);
        }) == Status::empty_video);
  // Template without the required placeholders.
  const fs::path ok = write_fake_video(tmp.path, 3, 32, 24);
  CHECK(testutil::thrown_status([&] {
          decode_video(ok, std::string(SEEDKIT_FAKE_DECODER) + " {input}",
                       tmp.path / "c", 1);
        }) == Status::config_invalid);
  // Missing input file.
  CHECK(testutil::thrown_status([&] {
          decode_video(tmp.path / "nope.fv", decoder_template(), tmp.path / "d", 1);
        }) == Status::io_error);
}

TEST_CASE("load_frames orders by filename and skips unreadable files") {
  testutil::TempDir tmp("load");
  write_png(tmp.path / "b.png", testutil::make_random_rgb(20, 20, 2));
  write_png(tmp.path / "a.png", testutil::make_random_rgb(20, 20, 1));
  write_png(tmp.path / "c.png", testutil::make_random_rgb(20, 20, 3));
  testutil::write_file_bytes(tmp.path / "broken.png", "not png");
  const FrameSet set = load_frames(tmp.path, 0.5);
  REQUIRE(set.frames.size() == 3);
  CHECK(set.frames[0].id == "a");
  CHECK(set.frames[1].id == "b");
  CHECK(set.frames[2].id == "c");
  CHECK(set.metadata.at("skipped") == "1");
  for (const auto& f : set.frames) {
    REQUIRE(f.capture_height_m.has_value());
    CHECK(*f.capture_height_m == 0.5);
  }
}

TEST_CASE("load_frames on an empty or unreadable directory") {
  testutil::TempDir tmp("loadempty");
  CHECK(testutil::thrown_status([&] { load_frames(tmp.path); }) ==
        Status::empty_directory);
  testutil::write_file_bytes(tmp.path / "only.png", "junk");
  CHECK(testutil::thrown_status([&] { load_frames(tmp.path); }) ==
        Status::empty_directory);
  CHECK(testutil::thrown_status([&] { load_frames(tmp.path / "nodir"); }) ==
        Status::io_error);
}

TEST_CASE("focus_score equals the brute-force laplacian variance") {
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    const ImageRGB8 img = testutil::make_random_rgb(23, 17, seed);
    CHECK(focus_score(img) == doctest::Approx(ref_focus(img)).epsilon(1e-12));
  }
}

TEST_CASE("focus_score is zero for constant and tiny frames") {
  CHECK(focus_score(ImageRGB8(16, 16, 77)) == 0.0);
  CHECK(focus_score(ImageRGB8(2, 2, 10)) == 0.0);
  CHECK(focus_score(ImageRGB8(1, 8, 10)) == 0.0);
}

TEST_CASE("blurring strictly lowers the focus score") {
  const ImageRGB8 sharp = testutil::make_random_rgb(40, 40, 9);
  const ImageRGB8 blurred = box_blur3(sharp);
  CHECK(focus_score(sharp) > focus_score(blurred));
  CHECK(focus_score(blurred) > focus_score(box_blur3(blurred)));
}

TEST_CASE("select_frames ranks sharpest first with stable ties") {
  FrameSet set;
  const ImageRGB8 sharp = testutil::make_random_rgb(30, 30, 4);
  const ImageRGB8 blurred = box_blur3(sharp);
  const ImageRGB8 flat(30, 30, 100);
  // Two identical frames produce an exact score tie.
  for (const auto* img : {&blurred, &sharp, &flat, &blurred}) {
    Frame f;
    f.id = "f" + std::to_string(set.frames.size());
    f.pixels = *img;
    set.frames.push_back(std::move(f));
  }
  const auto top = select_frames(set, 10);  // more than available: rank all
  REQUIRE(top.size() == 4);
  CHECK(top[0] == 1);  // sharp
  CHECK(top[1] == 0);  // the blurred twins tie; frame order decides
  CHECK(top[2] == 3);
  CHECK(top[3] == 2);  // flat scores 0, last

  const auto top2 = select_frames(set, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0] == 1);
  CHECK(top2[1] == 0);
}
