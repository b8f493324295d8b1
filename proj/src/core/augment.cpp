#include "seedkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "seedkit/error.hpp"
#include "seedkit/rng.hpp"

namespace seedkit {
namespace {

constexpr double kPi = 3.14159265358979323846;

uint8_t clamp_round_u8(double v) {
  return uint8_t(std::clamp(std::lround(v), 0l, 255l));
}

// Bilinear sample at continuous coords (sx, sy) on premultiplied-alpha
// values; pixel i covers [i, i+1) with center i+0.5. Out-of-source taps are
// fully transparent.
void sample_premultiplied(const ImageRGBA8& img, double sx, double sy,
                          uint8_t out[4]) {
  const double fx = sx - 0.5, fy = sy - 0.5;
  const int x0 = int(std::floor(fx)), y0 = int(std::floor(fy));
  const double dx = fx - x0, dy = fy - y0;

  double acc[4] = {0, 0, 0, 0};  // premultiplied r, g, b and alpha
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const double wgt = (i ? dx : 1.0 - dx) * (j ? dy : 1.0 - dy);
      if (wgt == 0.0) continue;
      const int x = x0 + i, y = y0 + j;
      if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
      const uint8_t* p = img.px(x, y);
      const double a = p[3];
      acc[0] += wgt * a * p[0];
      acc[1] += wgt * a * p[1];
      acc[2] += wgt * a * p[2];
      acc[3] += wgt * a;
    }
  }
  if (acc[3] <= 0.0) {
    out[0] = out[1] = out[2] = out[3] = 0;
    return;
  }
  out[0] = clamp_round_u8(acc[0] / acc[3]);
  out[1] = clamp_round_u8(acc[1] / acc[3]);
  out[2] = clamp_round_u8(acc[2] / acc[3]);
  out[3] = clamp_round_u8(acc[3]);
}

// Quarter turns are exact pixel permutations. k is the number of 90-degree
// counterclockwise steps, 0..3.
ImageRGBA8 quarter_turn(const ImageRGBA8& img, int k) {
  const int w = img.width, h = img.height;
  if (k == 0) return img;
  ImageRGBA8 out(k == 2 ? w : h, k == 2 ? h : w);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      int sx, sy;
      switch (k) {
        case 1: sx = w - 1 - y; sy = x; break;          // 90 ccw
        case 2: sx = w - 1 - x; sy = h - 1 - y; break;  // 180
        default: sx = y; sy = h - 1 - x; break;         // 270 ccw
      }
      std::copy_n(img.px(sx, sy), 4, out.px(x, y));
    }
  }
  return out;
}

double normalize_angle(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a < 0) a += 360.0;
  return a;
}

}  // namespace

void AugmentationRanges::validate() const {
  if (brightness_min > brightness_max || rotation_min > rotation_max ||
      scale_min > scale_max) {
    fail(Status::config_invalid, "augmentation range is empty");
  }
  if (scale_min <= 0.0) {
    fail(Status::config_invalid, "scale range must be strictly positive");
  }
  for (double p : {p_hflip, p_vflip, p_brightness, p_rotation, p_scale}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(Status::config_invalid, "probability outside [0, 1]");
    }
  }
}

AugmentationParams sample_params(uint64_t rng_seed,
                                 const AugmentationRanges& ranges) {
  ranges.validate();
  Rng rng(rng_seed);
  AugmentationParams p;
  if (rng.coin(ranges.p_brightness)) {
    p.brightness_delta = rng.uniform(ranges.brightness_min, ranges.brightness_max);
  }
  p.hflip = rng.coin(ranges.p_hflip);
  p.vflip = rng.coin(ranges.p_vflip);
  if (rng.coin(ranges.p_rotation)) {
    p.rotation_deg = rng.uniform(ranges.rotation_min, ranges.rotation_max);
  }
  if (rng.coin(ranges.p_scale)) {
    p.scale = rng.uniform(ranges.scale_min, ranges.scale_max);
  }
  return p;
}

void rotated_canvas_size(int w, int h, double angle_deg, int* out_w, int* out_h) {
  const double a = normalize_angle(angle_deg);
  const int quarter = int(std::lround(a / 90.0)) % 4;
  if (std::abs(a - 90.0 * std::lround(a / 90.0)) < 1e-9) {
    *out_w = (quarter % 2) ? h : w;
    *out_h = (quarter % 2) ? w : h;
    return;
  }
  const double rad = a * kPi / 180.0;
  const double c = std::abs(std::cos(rad)), s = std::abs(std::sin(rad));
  *out_w = std::max(1, int(std::lround(w * c + h * s)));
  *out_h = std::max(1, int(std::lround(w * s + h * c)));
}

void scaled_size(int w, int h, double factor, int* out_w, int* out_h) {
  *out_w = std::max(1, int(std::lround(w * factor)));
  *out_h = std::max(1, int(std::lround(h * factor)));
}

void augmented_size(int w, int h, const AugmentationParams& params, int* out_w,
                    int* out_h) {
  if (params.rotation_deg) rotated_canvas_size(w, h, *params.rotation_deg, &w, &h);
  if (params.scale) scaled_size(w, h, *params.scale, &w, &h);
  *out_w = w;
  *out_h = h;
}

ImageRGBA8 apply_brightness(const ImageRGBA8& img, double delta) {
  ImageRGBA8 out = img;
  for (size_t i = 0; i < out.data.size(); i += 4) {
    out.data[i] = clamp_round_u8(double(out.data[i]) + delta);
    out.data[i + 1] = clamp_round_u8(double(out.data[i + 1]) + delta);
    out.data[i + 2] = clamp_round_u8(double(out.data[i + 2]) + delta);
  }
  return out;
}

ImageRGBA8 apply_flip(const ImageRGBA8& img, FlipAxis axis) {
  ImageRGBA8 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int sx = axis == FlipAxis::horizontal ? img.width - 1 - x : x;
      const int sy = axis == FlipAxis::vertical ? img.height - 1 - y : y;
      std::copy_n(img.px(sx, sy), 4, out.px(x, y));
    }
  }
  return out;
}

ImageRGBA8 apply_rotation(const ImageRGBA8& img, double angle_deg) {
  const double a = normalize_angle(angle_deg);
  if (std::abs(a - 90.0 * std::lround(a / 90.0)) < 1e-9) {
    return quarter_turn(img, int(std::lround(a / 90.0)) % 4);
  }

  int out_w, out_h;
  rotated_canvas_size(img.width, img.height, a, &out_w, &out_h);
  ImageRGBA8 out(out_w, out_h);

  // Inverse map: rotate output-center offsets clockwise back into the source.
  const double rad = a * kPi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double ocx = out_w / 2.0, ocy = out_h / 2.0;
  const double icx = img.width / 2.0, icy = img.height / 2.0;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const double rx = (x + 0.5) - ocx, ry = (y + 0.5) - ocy;
      const double sx = c * rx - s * ry + icx;
      const double sy = s * rx + c * ry + icy;
      sample_premultiplied(img, sx, sy, out.px(x, y));
    }
  }
  return out;
}

ImageRGBA8 apply_scale(const ImageRGBA8& img, double factor) {
  if (!(factor > 0.0)) fail(Status::config_invalid, "scale factor must be > 0");
  int out_w, out_h;
  scaled_size(img.width, img.height, factor, &out_w, &out_h);
  if (out_w == img.width && out_h == img.height && factor == 1.0) return img;

  ImageRGBA8 out(out_w, out_h);
  const double x_ratio = double(img.width) / out_w;
  const double y_ratio = double(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      sample_premultiplied(img, (x + 0.5) * x_ratio, (y + 0.5) * y_ratio,
                           out.px(x, y));
    }
  }
  return out;
}

SeedCutout augment(const SeedCutout& cutout, const AugmentationParams& params) {
  ImageRGBA8 img = cutout.pixels;
  if (params.brightness_delta) img = apply_brightness(img, *params.brightness_delta);
  if (params.hflip) img = apply_flip(img, FlipAxis::horizontal);
  if (params.vflip) img = apply_flip(img, FlipAxis::vertical);
  if (params.rotation_deg) img = apply_rotation(img, *params.rotation_deg);
  if (params.scale) img = apply_scale(img, *params.scale);

  if (!any_opaque(img)) {
    fail(Status::degenerate_cutout,
         "augmentation of " + cutout.id + " left no opaque pixels");
  }

  SeedCutout out;
  char suffix[24];
  std::snprintf(suffix, sizeof(suffix), "_a%016llx",
                (unsigned long long)params_digest(params));
  out.id = cutout.id + suffix;
  out.pixels = std::move(img);
  out.class_label = cutout.class_label;
  out.capture_height_m = cutout.capture_height_m;
  out.source_frame = cutout.source_frame;
  out.area_px = opaque_area(out.pixels);
  return out;
}

uint64_t params_digest(const AugmentationParams& params) {
  Hash64 h;
  h.add(uint64_t((params.brightness_delta.has_value() << 0) |
                 (params.hflip << 1) | (params.vflip << 2) |
                 (params.rotation_deg.has_value() << 3) |
                 (params.scale.has_value() << 4)));
  if (params.brightness_delta) h.add(*params.brightness_delta);
  if (params.rotation_deg) h.add(*params.rotation_deg);
  if (params.scale) h.add(*params.scale);
  return h.digest();
}

}  // namespace seedkit
