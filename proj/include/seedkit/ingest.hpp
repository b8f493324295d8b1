#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seedkit/image.hpp"

namespace seedkit {

struct Frame {
  std::string id;
  ImageRGB8 pixels;
  std::string source;  // file path the pixels were loaded from
  std::optional<double> capture_height_m;
};

struct FrameSet {
  std::vector<Frame> frames;
  std::map<std::string, std::string> metadata;
};

// Runs the user-configured decoder command to turn a video into numbered PNG
// frames under out_dir, then keeps every sample_every-th emitted frame
// (indices 0, n, 2n, ...) and deletes the rest. The template must contain the
// placeholders {input} and {output_pattern}; {output_pattern} is replaced by
// "<out_dir>/frame_%06d.png". The exact command line is recorded in the
// returned metadata under "command".
//
// Video decoding is deliberately not done natively: codecs are environment
// business, e.g. decoder_template = "ffmpeg -y -i {input} {output_pattern}".
FrameSet decode_video(const std::filesystem::path& video_path,
                      const std::string& decoder_template,
                      const std::filesystem::path& out_dir, int sample_every);

// Loads every PNG in dir in lexicographic filename order. Unreadable files
// are skipped; the skip count lands in metadata["skipped"].
FrameSet load_frames(const std::filesystem::path& dir,
                     std::optional<double> capture_height_m = std::nullopt);

// Sharpness proxy: population variance of the 3x3 Laplacian
// (4-neighbor minus 4x center) of the grayscale image, over interior pixels.
// Exactly 0 for constant frames and for frames smaller than 3x3.
double focus_score(const ImageRGB8& img);

// Indices of the top_k sharpest frames, sharpest first. Equal scores keep
// frame order. top_k greater than the set size returns all frames ranked.
std::vector<size_t> select_frames(const FrameSet& frames, size_t top_k);

}  // namespace seedkit
