#pragma once

#include <optional>

#include "seedkit/image.hpp"
#include "seedkit/segment.hpp"

namespace seedkit {

// Ranges and per-transform inclusion probabilities for the randomized
// transform sequence. Defaults: brightness +/-40 of 255, flips at 0.5, full
// rotation circle, scale [0.6, 1.4] (covers the residual apparent-size spread
// within a height bucket).
struct AugmentationRanges {
  double brightness_min = -40.0, brightness_max = 40.0;
  double p_hflip = 0.5, p_vflip = 0.5;
  double rotation_min = 0.0, rotation_max = 360.0;
  double scale_min = 0.6, scale_max = 1.4;
  double p_brightness = 1.0, p_rotation = 1.0, p_scale = 1.0;

  void validate() const;
};

// One sampled transform sequence. Absent values mean the transform was not
// included in this draw.
struct AugmentationParams {
  std::optional<double> brightness_delta;
  bool hflip = false;
  bool vflip = false;
  std::optional<double> rotation_deg;
  std::optional<double> scale;

  bool operator==(const AugmentationParams&) const = default;
};

// Draws params from a generator seeded with rng_seed. Draw order is fixed:
// brightness, hflip, vflip, rotation, scale; for each, first the inclusion
// coin, then (only if included) the uniform value. Same seed, same params.
AugmentationParams sample_params(uint64_t rng_seed, const AugmentationRanges& ranges);

// Params-dependent output geometry, shared with scene planning so placement
// bounds match the rendered raster exactly.
void rotated_canvas_size(int w, int h, double angle_deg, int* out_w, int* out_h);
void scaled_size(int w, int h, double factor, int* out_w, int* out_h);
void augmented_size(int w, int h, const AugmentationParams& params, int* out_w,
                    int* out_h);

// RGB channels become clamp(round(v + delta), 0, 255); alpha is untouched.
ImageRGBA8 apply_brightness(const ImageRGBA8& img, double delta);

enum class FlipAxis { horizontal, vertical };
ImageRGBA8 apply_flip(const ImageRGBA8& img, FlipAxis axis);

// Rotates counterclockwise about the raster center; the output canvas is the
// rotated bounding box. Resampling is bilinear on premultiplied alpha;
// samples outside the source are fully transparent. Multiples of 90 degrees
// take an exact permutation path (no interpolation).
ImageRGBA8 apply_rotation(const ImageRGBA8& img, double angle_deg);

// Resizes to (round(W*factor), round(H*factor)), minimum 1x1, bilinear on
// premultiplied alpha. factor must be > 0.
ImageRGBA8 apply_scale(const ImageRGBA8& img, double factor);

// Applies the present transforms in the fixed order brightness, hflip, vflip,
// rotation, scale. The returned cutout keeps class_label and
// capture_height_m; its id gains a suffix derived from the params, and
// area_px is recomputed. A result with no pixel of alpha > 0 raises
// DegenerateCutout.
SeedCutout augment(const SeedCutout& cutout, const AugmentationParams& params);

// Stable 64-bit digest of a params value (used for id suffixes).
uint64_t params_digest(const AugmentationParams& params);

}  // namespace seedkit
