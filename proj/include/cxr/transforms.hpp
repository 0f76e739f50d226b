#ifndef CXR_TRANSFORMS_HPP
#define CXR_TRANSFORMS_HPP

#include <array>

#include "cxr/image.hpp"
#include "cxr/rng.hpp"
#include "cxr/tensor.hpp"

namespace cxr {

struct PreprocessConfig {
  int target_size = 224;
  // ImageNet channel statistics; the frozen backbones were trained under
  // these, so normalized inputs must match.
  std::array<double, 3> channel_mean = {0.485, 0.456, 0.406};
  std::array<double, 3> channel_std = {0.229, 0.224, 0.225};

  void validate() const;
};

struct AugmentConfig {
  double horizontal_flip_probability = 0.5;
  double vertical_flip_probability = 0.5;
  double rotation_min_degrees = -10.0;
  double rotation_max_degrees = 10.0;

  void validate() const;
};

// Bilinear resize to target x target, align-corners-false convention:
// source sample center for output index i is (i + 0.5) * scale - 0.5.
Image resize_bilinear(const Image& image, int target_size);

// Exact per-pixel flips.
Image flip_horizontal(const Image& image);
Image flip_vertical(const Image& image);

// Rotation about the image center, bilinear resampling, edge-value
// padding. Output shape equals input shape.
Image rotate(const Image& image, double degrees);

// Flips by their probabilities, then rotation by an angle drawn uniformly
// from the configured range. Consumes a fixed number of rng draws per call.
Image augment(const Image& image, const AugmentConfig& config, Rng& rng);

// Grayscale replicated to 3 channels, scaled to [0,1], standardized per
// channel, CHW layout (3 x H x W).
Tensor to_model_tensor(const Image& image, const PreprocessConfig& config);

}  // namespace cxr

#endif
