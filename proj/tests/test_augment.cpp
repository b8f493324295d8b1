#include <algorithm>
#include <cstdio>
#include <map>

#include "doctest.h"
#include "seedkit/augment.hpp"
#include "seedkit/error.hpp"
#include "seedkit/rng.hpp"
#include "test_util.hpp"

using namespace seedkit;

namespace {

AugmentationRanges nothing_included() {
  AugmentationRanges r;
  r.p_brightness = 0.0;
  r.p_hflip = 0.0;
  r.p_vflip = 0.0;
  r.p_rotation = 0.0;
  r.p_scale = 0.0;
  return r;
}

// Sorted copy of all RGBA pixel values, for permutation checks.
std::vector<uint32_t> pixel_multiset(const ImageRGBA8& img) {
  std::vector<uint32_t> v;
  v.reserve(img.data.size() / 4);
  for (size_t i = 0; i < img.data.size(); i += 4) {
    v.push_back(uint32_t(img.data[i]) | uint32_t(img.data[i + 1]) << 8 |
                uint32_t(img.data[i + 2]) << 16 | uint32_t(img.data[i + 3]) << 24);
  }
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("sample_params honors inclusion probabilities") {
  SUBCASE("all zero: nothing sampled") {
    const auto p = sample_params(1234, nothing_included());
    CHECK(!p.brightness_delta);
    CHECK(!p.hflip);
    CHECK(!p.vflip);
    CHECK(!p.rotation_deg);
    CHECK(!p.scale);
    CHECK(p == AugmentationParams{});
  }
  SUBCASE("all one with collapsed ranges: exact values") {
    AugmentationRanges r;
    r.p_hflip = 1.0;
    r.p_vflip = 1.0;
    r.brightness_min = r.brightness_max = 7.0;
    r.rotation_min = r.rotation_max = 90.0;
    r.scale_min = r.scale_max = 2.0;
    const auto p = sample_params(99, r);
    REQUIRE(p.brightness_delta.has_value());
    CHECK(*p.brightness_delta == 7.0);
    CHECK(p.hflip);
    CHECK(p.vflip);
    CHECK(*p.rotation_deg == 90.0);
    CHECK(*p.scale == 2.0);
  }
}

TEST_CASE("sample_params is deterministic and seed-sensitive") {
  AugmentationRanges r;
  CHECK(sample_params(42, r) == sample_params(42, r));
  int differing = 0;
  for (uint64_t s = 0; s < 50; ++s) {
    if (!(sample_params(s, r) == sample_params(s + 1, r))) ++differing;
  }
  CHECK(differing > 40);
}

TEST_CASE("sampled values stay inside their ranges") {
  AugmentationRanges r;
  for (uint64_t s = 0; s < 500; ++s) {
    const auto p = sample_params(s, r);
    if (p.brightness_delta) {
      CHECK(*p.brightness_delta >= r.brightness_min);
      CHECK(*p.brightness_delta < r.brightness_max);
    }
    if (p.rotation_deg) {
      CHECK(*p.rotation_deg >= r.rotation_min);
      CHECK(*p.rotation_deg < r.rotation_max);
    }
    if (p.scale) {
      CHECK(*p.scale >= r.scale_min);
      CHECK(*p.scale < r.scale_max);
    }
  }
}

TEST_CASE("hflip draw frequency is near one half") {
  AugmentationRanges r;  // p_hflip defaults to 0.5
  int flips = 0;
  for (uint64_t s = 0; s < 1000; ++s) {
    if (sample_params(s, r).hflip) ++flips;
  }
  CHECK(flips >= 450);
  CHECK(flips <= 550);
}

TEST_CASE("flips are involutions and mirror correctly") {
  const ImageRGBA8 img = testutil::make_random_rgba(13, 7, 21);
  const ImageRGBA8 h = apply_flip(img, FlipAxis::horizontal);
  const ImageRGBA8 v = apply_flip(img, FlipAxis::vertical);
  CHECK(apply_flip(h, FlipAxis::horizontal) == img);
  CHECK(apply_flip(v, FlipAxis::vertical) == img);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      CHECK(std::equal(img.px(x, y), img.px(x, y) + 4, h.px(img.width - 1 - x, y)));
      CHECK(std::equal(img.px(x, y), img.px(x, y) + 4, v.px(x, img.height - 1 - y)));
    }
  }
}

TEST_CASE("brightness shifts rgb only, with clamping") {
  const ImageRGBA8 img = testutil::make_random_rgba(9, 9, 3);
  CHECK(apply_brightness(img, 0.0) == img);
  const ImageRGBA8 up = apply_brightness(img, 300.0);
  const ImageRGBA8 down = apply_brightness(img, -300.0);
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 9; ++x) {
      for (int c = 0; c < 3; ++c) {
        CHECK(up.px(x, y)[c] == 255);
        CHECK(down.px(x, y)[c] == 0);
      }
      CHECK(up.px(x, y)[3] == img.px(x, y)[3]);
      CHECK(down.px(x, y)[3] == img.px(x, y)[3]);
    }
  }
  // Rounding: 100 + 10.6 -> 111.
  ImageRGBA8 one(1, 1, 0);
  one.px(0, 0)[0] = 100;
  one.px(0, 0)[3] = 255;
  CHECK(apply_brightness(one, 10.6).px(0, 0)[0] == 111);
}

TEST_CASE("quarter-turn rotations are exact permutations") {
  const ImageRGBA8 img = testutil::make_random_rgba(11, 6, 77);
  const ImageRGBA8 r90 = apply_rotation(img, 90.0);
  CHECK(r90.width == img.height);
  CHECK(r90.height == img.width);
  CHECK(pixel_multiset(r90) == pixel_multiset(img));

  // Four quarter turns come home exactly.
  ImageRGBA8 cur = img;
  for (int i = 0; i < 4; ++i) cur = apply_rotation(cur, 90.0);
  CHECK(cur == img);

  // 180 via two routes.
  CHECK(apply_rotation(img, 180.0) == apply_rotation(r90, 90.0));
  // 270 equals three quarter turns.
  CHECK(apply_rotation(img, 270.0) ==
        apply_rotation(apply_rotation(r90, 90.0), 90.0));
  // Full turn is identity.
  CHECK(apply_rotation(img, 360.0) == img);
  CHECK(apply_rotation(img, 0.0) == img);
}

TEST_CASE("rotation roughly conserves opaque area") {
  Rng rng(5005);
  for (int trial = 0; trial < 25; ++trial) {
    const auto cut = testutil::make_blob_cutout("b", rng.next(), 18, 180, 160, 90);
    const double angle = rng.uniform(0.0, 360.0);
    const ImageRGBA8 rot = apply_rotation(cut.pixels, angle);
    const double before = double(opaque_area(cut.pixels));
    const double after = double(opaque_area(rot));
    CHECK(std::abs(after - before) <= 0.02 * before);
  }
}

TEST_CASE("rotated output alpha comes only from inside the source") {
  const auto cut = testutil::make_disk_cutout("d", 10, 200, 100, 50);
  const ImageRGBA8 rot = apply_rotation(cut.pixels, 33.0);
  // Corners of the rotated bounding box lie outside the source: transparent.
  CHECK(rot.alpha(0, 0) == 0);
  CHECK(rot.alpha(rot.width - 1, 0) == 0);
  CHECK(rot.alpha(0, rot.height - 1) == 0);
  CHECK(rot.alpha(rot.width - 1, rot.height - 1) == 0);
}

TEST_CASE("scale resizes by rounded factor") {
  const ImageRGBA8 img = testutil::make_random_rgba(10, 8, 15);
  CHECK(apply_scale(img, 1.0) == img);
  const ImageRGBA8 twice = apply_scale(img, 2.0);
  CHECK(twice.width == 20);
  CHECK(twice.height == 16);
  const ImageRGBA8 half = apply_scale(img, 0.5);
  CHECK(half.width == 5);
  CHECK(half.height == 4);
  // Floor at 1x1 instead of vanishing.
  const ImageRGBA8 dot = apply_scale(img, 0.01);
  CHECK(dot.width == 1);
  CHECK(dot.height == 1);
  CHECK(testutil::thrown_status([&] { apply_scale(img, 0.0); }) ==
        Status::config_invalid);
}

TEST_CASE("scaling tracks area quadratically") {
  const auto cut = testutil::make_disk_cutout("d", 16, 90, 200, 40);
  const double base = double(opaque_area(cut.pixels));
  for (double f : {0.5, 1.5, 2.0}) {
    const double scaled = double(opaque_area(apply_scale(cut.pixels, f)));
    CHECK(scaled == doctest::Approx(base * f * f).epsilon(0.10));
  }
}

TEST_CASE("augment applies the fixed transform order") {
  const auto cut = testutil::make_disk_cutout("seed1", 9, 120, 180, 60);

  SUBCASE("no-op params keep the pixels and tag the id") {
    const AugmentationParams none;
    const SeedCutout out = augment(cut, none);
    CHECK(out.pixels == cut.pixels);
    CHECK(out.class_label == cut.class_label);
    CHECK(out.capture_height_m == cut.capture_height_m);
    CHECK(out.area_px == cut.area_px);
    CHECK(out.id != cut.id);
    CHECK(out.id.rfind(cut.id + "_a", 0) == 0);
  }

  SUBCASE("rotation then scale: scale acts on the rotated canvas") {
    AugmentationParams p;
    p.rotation_deg = 90.0;
    p.scale = 2.0;
    const SeedCutout out = augment(cut, p);
    // Source is square here, so use a rectangle to pin the order.
    ImageRGBA8 rect(12, 6, 0);
    for (auto& v : rect.data) v = 255;
    SeedCutout rcut = cut;
    rcut.pixels = rect;
    const SeedCutout rout = augment(rcut, p);
    CHECK(rout.pixels.width == 12);   // rotate: 6x12, then scale: 12x24
    CHECK(rout.pixels.height == 24);
    CHECK(out.pixels.width == 2 * cut.pixels.width);
  }

  SUBCASE("augmented_size agrees with the rendered raster") {
    AugmentationRanges ranges;
    for (uint64_t s = 0; s < 300; ++s) {
      const auto p = sample_params(s, ranges);
      int w = 0, h = 0;
      augmented_size(cut.pixels.width, cut.pixels.height, p, &w, &h);
      const SeedCutout out = augment(cut, p);
      CHECK(out.pixels.width == w);
      CHECK(out.pixels.height == h);
    }
  }

  SUBCASE("id suffix encodes the params digest") {
    AugmentationParams p;
    p.hflip = true;
    const SeedCutout out = augment(cut, p);
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "_a%016llx",
                  (unsigned long long)params_digest(p));
    CHECK(out.id == cut.id + suffix);
    // Different params, different digest.
    AugmentationParams q;
    q.vflip = true;
    CHECK(params_digest(p) != params_digest(q));
    CHECK(params_digest(p) == params_digest(p));
  }
}

TEST_CASE("augment rejects a result with no opaque pixel") {
  SeedCutout ghost;
  ghost.id = "ghost";
  ghost.pixels = ImageRGBA8(8, 8, 0);  // fully transparent
  ghost.class_label = "c";
  ghost.capture_height_m = 0.3;
  CHECK(testutil::thrown_status([&] { augment(ghost, AugmentationParams{}); }) ==
        Status::degenerate_cutout);
}

TEST_CASE("augmentation ranges validate") {
  AugmentationRanges r;
  r.scale_min = -0.5;
  CHECK(testutil::thrown_status([&] { r.validate(); }) == Status::config_invalid);
  r = AugmentationRanges{};
  r.p_hflip = 1.5;
  CHECK(testutil::thrown_status([&] { r.validate(); }) == Status::config_invalid);
  r = AugmentationRanges{};
  r.brightness_min = 10.0;
  r.brightness_max = -10.0;
  CHECK(testutil::thrown_status([&] { r.validate(); }) == Status::config_invalid);
}
