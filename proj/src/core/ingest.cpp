#include "seedkit/ingest.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "seedkit/error.hpp"
#include "seedkit/png_io.hpp"

namespace seedkit {
namespace {

namespace fs = std::filesystem;

std::string replace_all(std::string s, const std::string& from,
                        const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

// Runs a shell command, captures combined stdout/stderr, returns exit code.
int run_command(const std::string& cmd, std::string* output) {
  std::string wrapped = cmd + " 2>&1";
  FILE* pipe = popen(wrapped.c_str(), "r");
  if (!pipe) fail(Status::io_error, "failed to launch decoder: " + cmd);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) {
    output->append(buf, n);
  }
  int rc = pclose(pipe);
  if (rc == -1) fail(Status::io_error, "failed to reap decoder process");
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return 128;  // killed by signal
}

std::vector<fs::path> list_pngs_sorted(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

}  // namespace

FrameSet decode_video(const fs::path& video_path,
                      const std::string& decoder_template,
                      const fs::path& out_dir, int sample_every) {
  if (decoder_template.find("{input}") == std::string::npos ||
      decoder_template.find("{output_pattern}") == std::string::npos) {
    fail(Status::config_invalid,
         "decoder template must contain {input} and {output_pattern}");
  }
  if (sample_every < 1) fail(Status::config_invalid, "sample_every must be >= 1");
  if (!fs::exists(video_path)) {
    fail(Status::io_error, "video not found: " + video_path.string());
  }
  fs::create_directories(out_dir);
  // Stale frames from an earlier decode would corrupt the sampling indices.
  for (const auto& old : list_pngs_sorted(out_dir)) {
    if (old.filename().string().rfind("frame_", 0) == 0) fs::remove(old);
  }

  const std::string pattern = (out_dir / "frame_%06d.png").string();
  std::string cmd = replace_all(decoder_template, "{input}", video_path.string());
  cmd = replace_all(cmd, "{output_pattern}", pattern);

  std::string diag;
  const int rc = run_command(cmd, &diag);
  if (rc != 0) {
    fail(Status::decode_failed,
         "decoder exited with status " + std::to_string(rc) + ": " + cmd +
             "\n" + diag);
  }

  auto emitted = list_pngs_sorted(out_dir);
  if (emitted.empty()) {
    fail(Status::empty_video, "decoder emitted no frames: " + cmd);
  }

  FrameSet set;
  set.metadata["command"] = cmd;
  set.metadata["sample_every"] = std::to_string(sample_every);
  set.metadata["emitted"] = std::to_string(emitted.size());
  for (size_t i = 0; i < emitted.size(); ++i) {
    if (i % size_t(sample_every) != 0) {
      fs::remove(emitted[i]);
      continue;
    }
    Frame f;
    f.id = emitted[i].stem().string();
    f.source = emitted[i].string();
    f.pixels = read_png_rgb(emitted[i]);
    set.frames.push_back(std::move(f));
  }
  set.metadata["retained"] = std::to_string(set.frames.size());
  return set;
}

FrameSet load_frames(const fs::path& dir, std::optional<double> capture_height_m) {
  if (!fs::is_directory(dir)) {
    fail(Status::io_error, "not a directory: " + dir.string());
  }
  FrameSet set;
  size_t skipped = 0;
  for (const auto& path : list_pngs_sorted(dir)) {
    Frame f;
    f.id = path.stem().string();
    f.source = path.string();
    f.capture_height_m = capture_height_m;
    try {
      f.pixels = read_png_rgb(path);
    } catch (const Error&) {
      ++skipped;
      continue;
    }
    set.frames.push_back(std::move(f));
  }
  if (set.frames.empty()) {
    fail(Status::empty_directory, "no readable PNG frames in " + dir.string());
  }
  set.metadata["skipped"] = std::to_string(skipped);
  if (capture_height_m) {
    set.metadata["capture_height_m"] = std::to_string(*capture_height_m);
  }
  return set;
}

double focus_score(const ImageRGB8& img) {
  const int w = img.width, h = img.height;
  if (w < 3 || h < 3) return 0.0;
  const std::vector<double> gray = to_gray(img);
  const auto g = [&](int x, int y) { return gray[size_t(y) * w + x]; };

  double sum = 0.0, sum_sq = 0.0;
  const int64_t n = int64_t(w - 2) * (h - 2);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double lap =
          g(x - 1, y) + g(x + 1, y) + g(x, y - 1) + g(x, y + 1) - 4.0 * g(x, y);
      sum += lap;
      sum_sq += lap * lap;
    }
  }
  const double mean = sum / double(n);
  return sum_sq / double(n) - mean * mean;
}

std::vector<size_t> select_frames(const FrameSet& frames, size_t top_k) {
  if (frames.frames.empty()) fail(Status::empty_input, "empty frame set");
  std::vector<size_t> order(frames.frames.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::vector<double> scores(frames.frames.size());
  for (size_t i = 0; i < frames.frames.size(); ++i) {
    scores[i] = focus_score(frames.frames[i].pixels);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  if (order.size() > top_k) order.resize(top_k);
  return order;
}

}  // namespace seedkit
