// Test stand-in for a video decoder. The "video" is a text file
//   <frame count> <width> <height> [crash]
// and the tool writes that many PNG frames following the %06d output
// pattern, exactly like the real decoder command contract expects. Frames
// are dark noise with a handful of bright disks so segmentation tests can
// run on them; pixel content is a pure function of the frame index.
// "crash" makes the tool exit nonzero after writing one frame, to exercise
// decoder-failure handling.

#include <cstdio>
#include <fstream>
#include <string>

#include "seedkit/image.hpp"
#include "seedkit/png_io.hpp"
#include "seedkit/rng.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: fake_decoder <video> <output_pattern>\n");
    return 2;
  }
  std::ifstream in(argv[1]);
  if (!in) {
    std::fprintf(stderr, "fake_decoder: cannot open %s\n", argv[1]);
    return 2;
  }
  int frames = 0, width = 0, height = 0;
  std::string mode;
  in >> frames >> width >> height >> mode;
  const std::string pattern = argv[2];
  const auto marker = pattern.find("%06d");
  if (marker == std::string::npos) {
    std::fprintf(stderr, "fake_decoder: pattern lacks %%06d\n");
    return 2;
  }

  for (int i = 0; i < frames; ++i) {
    seedkit::ImageRGB8 img(width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        uint8_t* px = img.px(x, y);
        const uint8_t v = uint8_t(16 + (x * 7 + y * 13 + i * 31) % 9);
        px[0] = v;
        px[1] = v;
        px[2] = v;
      }
    }
    // A few bright disks per frame, deterministic in the frame index.
    seedkit::Rng rng(seedkit::hash64(uint64_t(9000), uint64_t(i)));
    const int disks = 4 + int(rng.next_below(3));
    for (int d = 0; d < disks; ++d) {
      const int r = 5 + int(rng.next_below(5));
      const int cx = r + 2 + int(rng.next_below(uint64_t(width - 2 * r - 4)));
      const int cy = r + 2 + int(rng.next_below(uint64_t(height - 2 * r - 4)));
      const uint8_t tone = uint8_t(170 + rng.next_below(70));
      for (int y = cy - r; y <= cy + r; ++y) {
        for (int x = cx - r; x <= cx + r; ++x) {
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) {
            uint8_t* px = img.px(x, y);
            px[0] = tone;
            px[1] = tone;
            px[2] = uint8_t(tone - 30);
          }
        }
      }
    }

    char index[16];
    std::snprintf(index, sizeof index, "%06d", i);
    std::string path = pattern;
    path.replace(marker, 4, index);
    seedkit::write_png(path, img);
    if (mode == "crash") return 3;
  }
  return 0;
}
