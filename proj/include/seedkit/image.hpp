#pragma once

#include <cstdint>
#include <vector>

namespace seedkit {

// Row-major 8-bit rasters. Channel order is R,G,B[,A]; no padding between rows.

struct ImageRGB8 {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  ImageRGB8() = default;
  ImageRGB8(int w, int h, uint8_t fill = 0)
      : width(w), height(h), data(size_t(w) * h * 3, fill) {}

  uint8_t* px(int x, int y) { return data.data() + 3 * (size_t(y) * width + x); }
  const uint8_t* px(int x, int y) const {
    return data.data() + 3 * (size_t(y) * width + x);
  }
  bool empty() const { return width <= 0 || height <= 0; }
  bool operator==(const ImageRGB8&) const = default;
};

struct ImageRGBA8 {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  ImageRGBA8() = default;
  ImageRGBA8(int w, int h, uint8_t fill = 0)
      : width(w), height(h), data(size_t(w) * h * 4, fill) {}

  uint8_t* px(int x, int y) { return data.data() + 4 * (size_t(y) * width + x); }
  const uint8_t* px(int x, int y) const {
    return data.data() + 4 * (size_t(y) * width + x);
  }
  uint8_t alpha(int x, int y) const { return px(x, y)[3]; }
  bool empty() const { return width <= 0 || height <= 0; }
  bool operator==(const ImageRGBA8&) const = default;
};

// Rec.601 luma with integer weights summing to 1000, so pure gray inputs map
// exactly: (299 R + 587 G + 114 B) / 1000. Range [0, 255].
inline double gray_value(uint8_t r, uint8_t g, uint8_t b) {
  return double(299 * int(r) + 587 * int(g) + 114 * int(b)) / 1000.0;
}

// Same luma rounded to the nearest integer (for histograms and thresholds).
inline uint8_t gray_u8(uint8_t r, uint8_t g, uint8_t b) {
  return uint8_t((299 * int(r) + 587 * int(g) + 114 * int(b) + 500) / 1000);
}

std::vector<double> to_gray(const ImageRGB8& img);

// Count of pixels with alpha > 127 (the area_px convention).
int64_t opaque_area(const ImageRGBA8& img);

// True if any pixel has alpha > 0.
bool any_opaque(const ImageRGBA8& img);

}  // namespace seedkit
