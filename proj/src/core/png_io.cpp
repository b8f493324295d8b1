#include "seedkit/png_io.hpp"

#include <png.h>

#include <cstring>
#include <fstream>

#include "seedkit/error.hpp"

namespace seedkit {
namespace {

namespace fs = std::filesystem;

std::vector<uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Status::io_error, "cannot open file: " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) fail(Status::io_error, "read failed: " + path.string());
  return bytes;
}

struct MemReader {
  const uint8_t* data;
  size_t size;
  size_t pos;
};

void mem_read_fn(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->size) png_error(png, "unexpected end of stream");
  std::memcpy(out, r->data + r->pos, n);
  r->pos += n;
}

void mem_write_fn(png_structp png, png_bytep data, png_size_t n) {
  auto* v = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
  v->insert(v->end(), data, data + n);
}

void mem_flush_fn(png_structp) {}

// Decodes any PNG color type to packed 8-bit rows with `channels` (3 or 4).
void decode_png(const std::vector<uint8_t>& bytes, int channels, int* out_w,
                int* out_h, std::vector<uint8_t>* out_pixels,
                const std::string& what) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    fail(Status::decode_failed, "not a PNG file: " + what);
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(Status::io_error, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(Status::io_error, "libpng init failed");
  }

  MemReader reader{bytes.data(), bytes.size(), 0};
  std::vector<png_bytep> rows;
  // libpng reports errors by longjmp back to here.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Status::decode_failed, "corrupt PNG: " + what);
  }
  png_set_read_fn(png, &reader, mem_read_fn);
  png_read_info(png, info);

  png_set_expand(png);
  png_set_strip_16(png);
  png_set_gray_to_rgb(png);
  if (channels == 4) {
    png_set_add_alpha(png, 0xFF, PNG_FILLER_AFTER);
  } else {
    png_set_strip_alpha(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const int w = int(png_get_image_width(png, info));
  const int h = int(png_get_image_height(png, info));
  if (w <= 0 || h <= 0 ||
      png_get_rowbytes(png, info) != size_t(w) * channels) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Status::decode_failed, "unsupported PNG layout: " + what);
  }
  out_pixels->assign(size_t(w) * h * channels, 0);
  rows.resize(h);
  for (int y = 0; y < h; ++y) {
    rows[y] = out_pixels->data() + size_t(y) * w * channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  *out_w = w;
  *out_h = h;
}

// Fixed encoder settings; output bytes depend only on the pixel buffer.
std::vector<uint8_t> encode_png(const uint8_t* pixels, int w, int h,
                                int channels) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(Status::io_error, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(Status::io_error, "libpng init failed");
  }

  std::vector<uint8_t> out;
  std::vector<png_bytep> rows(h);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(Status::io_error, "PNG encode failed");
  }
  png_set_write_fn(png, &out, mem_write_fn, mem_flush_fn);
  png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), 8,
               channels == 4 ? PNG_COLOR_TYPE_RGB_ALPHA : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 4);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y) {
    rows[y] = const_cast<png_bytep>(pixels + size_t(y) * w * channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_file_bytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream outf(path, std::ios::binary | std::ios::trunc);
  if (!outf) fail(Status::io_error, "cannot open for write: " + path.string());
  outf.write(reinterpret_cast<const char*>(bytes.data()),
             std::streamsize(bytes.size()));
  if (!outf) fail(Status::io_error, "write failed: " + path.string());
}

uint32_t load_be32(const uint8_t* p) {
  return uint32_t(p[0]) << 24 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 8 |
         uint32_t(p[3]);
}

}  // namespace

ImageRGB8 read_png_rgb(const fs::path& path) {
  auto bytes = read_file_bytes(path);
  ImageRGB8 img;
  decode_png(bytes, 3, &img.width, &img.height, &img.data, path.string());
  return img;
}

ImageRGBA8 read_png_rgba(const fs::path& path) {
  auto bytes = read_file_bytes(path);
  ImageRGBA8 img;
  decode_png(bytes, 4, &img.width, &img.height, &img.data, path.string());
  return img;
}

void write_png(const fs::path& path, const ImageRGB8& img) {
  if (img.empty()) fail(Status::shape_error, "refusing to write empty image");
  write_file_bytes(path, encode_png(img.data.data(), img.width, img.height, 3));
}

void write_png(const fs::path& path, const ImageRGBA8& img) {
  if (img.empty()) fail(Status::shape_error, "refusing to write empty image");
  write_file_bytes(path, encode_png(img.data.data(), img.width, img.height, 4));
}

PngInfo read_png_info(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Status::io_error, "cannot open file: " + path.string());
  uint8_t head[33];  // signature + IHDR chunk
  in.read(reinterpret_cast<char*>(head), sizeof(head));
  if (in.gcount() != sizeof(head) || png_sig_cmp(head, 0, 8) != 0 ||
      std::memcmp(head + 12, "IHDR", 4) != 0) {
    fail(Status::decode_failed, "not a PNG file: " + path.string());
  }
  PngInfo pi;
  pi.width = int(load_be32(head + 16));
  pi.height = int(load_be32(head + 20));
  pi.bit_depth = head[24];
  pi.color_type = head[25];
  return pi;
}

}  // namespace seedkit
