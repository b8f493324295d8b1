#pragma once

#include <filesystem>

#include "seedkit/image.hpp"

namespace seedkit {

// PNG is the only raster format the toolkit reads or writes; it is lossless,
// so nothing is re-compressed between pipeline stages. Inputs of any PNG
// color type are expanded to 8-bit RGB/RGBA on read. Writes always use the
// same fixed encoder settings, which keeps output files byte-stable for a
// given pixel buffer.

ImageRGB8 read_png_rgb(const std::filesystem::path& path);
ImageRGBA8 read_png_rgba(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const ImageRGB8& img);
void write_png(const std::filesystem::path& path, const ImageRGBA8& img);

// Parses only the IHDR header. Cheap way to check dimensions of many files.
struct PngInfo {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
};
PngInfo read_png_info(const std::filesystem::path& path);

}  // namespace seedkit
