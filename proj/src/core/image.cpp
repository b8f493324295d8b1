#include "seedkit/image.hpp"

namespace seedkit {

std::vector<double> to_gray(const ImageRGB8& img) {
  std::vector<double> out(size_t(img.width) * img.height);
  const uint8_t* p = img.data.data();
  for (size_t i = 0; i < out.size(); ++i, p += 3) {
    out[i] = gray_value(p[0], p[1], p[2]);
  }
  return out;
}

int64_t opaque_area(const ImageRGBA8& img) {
  int64_t n = 0;
  for (size_t i = 3; i < img.data.size(); i += 4) {
    if (img.data[i] > 127) ++n;
  }
  return n;
}

bool any_opaque(const ImageRGBA8& img) {
  for (size_t i = 3; i < img.data.size(); i += 4) {
    if (img.data[i] > 0) return true;
  }
  return false;
}

}  // namespace seedkit
