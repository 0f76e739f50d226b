#include "cxr/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "cxr/errors.hpp"

namespace cxr {

void PreprocessConfig::validate() const {
  if (target_size <= 0) throw ValidationError("target_size must be positive");
  for (double s : channel_std) {
    if (!(s > 0.0)) throw ValidationError("channel_std must be positive");
  }
}

void AugmentConfig::validate() const {
  auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in01(horizontal_flip_probability) || !in01(vertical_flip_probability)) {
    throw ValidationError("flip probabilities must lie in [0,1]");
  }
  if (rotation_min_degrees > rotation_max_degrees) {
    throw ValidationError("rotation range lower bound exceeds upper bound");
  }
}

namespace {

// Bilinear sample with edge clamping.
float sample_bilinear(const Image& img, double sy, double sx, int c) {
  const int h = img.height, w = img.width;
  const int y0 = static_cast<int>(std::floor(sy));
  const int x0 = static_cast<int>(std::floor(sx));
  const double fy = sy - y0;
  const double fx = sx - x0;
  auto clampy = [&](int y) { return std::clamp(y, 0, h - 1); };
  auto clampx = [&](int x) { return std::clamp(x, 0, w - 1); };
  const double v00 = img.at(clampy(y0), clampx(x0), c);
  const double v01 = img.at(clampy(y0), clampx(x0 + 1), c);
  const double v10 = img.at(clampy(y0 + 1), clampx(x0), c);
  const double v11 = img.at(clampy(y0 + 1), clampx(x0 + 1), c);
  const double top = v00 * (1.0 - fx) + v01 * fx;
  const double bot = v10 * (1.0 - fx) + v11 * fx;
  return static_cast<float>(top * (1.0 - fy) + bot * fy);
}

}  // namespace

Image resize_bilinear(const Image& image, int target_size) {
  if (image.empty()) throw ValidationError("resize of empty image");
  if (target_size <= 0) throw ValidationError("target size must be positive");
  Image out(target_size, target_size, image.channels);
  const double scale_y = static_cast<double>(image.height) / target_size;
  const double scale_x = static_cast<double>(image.width) / target_size;
  for (int y = 0; y < target_size; ++y) {
    const double sy = (y + 0.5) * scale_y - 0.5;
    for (int x = 0; x < target_size; ++x) {
      const double sx = (x + 0.5) * scale_x - 0.5;
      for (int c = 0; c < image.channels; ++c) {
        out.at(y, x, c) = sample_bilinear(image, sy, sx, c);
      }
    }
  }
  return out;
}

Image flip_horizontal(const Image& image) {
  Image out(image.height, image.width, image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
      }
    }
  }
  return out;
}

Image flip_vertical(const Image& image) {
  Image out(image.height, image.width, image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        out.at(y, x, c) = image.at(image.height - 1 - y, x, c);
      }
    }
  }
  return out;
}

Image rotate(const Image& image, double degrees) {
  if (degrees == 0.0) return image;
  Image out(image.height, image.width, image.channels);
  const double rad = degrees * M_PI / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  const double cy = (image.height - 1) / 2.0;
  const double cx = (image.width - 1) / 2.0;
  // inverse mapping: rotate output coordinates back into the source
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double dy = y - cy, dx = x - cx;
      const double sx = cx + cs * dx + sn * dy;
      const double sy = cy - sn * dx + cs * dy;
      for (int c = 0; c < image.channels; ++c) {
        out.at(y, x, c) = sample_bilinear(image, sy, sx, c);
      }
    }
  }
  return out;
}

Image augment(const Image& image, const AugmentConfig& config, Rng& rng) {
  config.validate();
  // Fixed draw count per call keeps the stream position predictable.
  const bool do_h = rng.bernoulli(config.horizontal_flip_probability);
  const bool do_v = rng.bernoulli(config.vertical_flip_probability);
  const double angle =
      rng.uniform(config.rotation_min_degrees, config.rotation_max_degrees);
  Image out = image;
  if (do_h) out = flip_horizontal(out);
  if (do_v) out = flip_vertical(out);
  out = rotate(out, angle);
  return out;
}

Tensor to_model_tensor(const Image& image, const PreprocessConfig& config) {
  config.validate();
  if (image.channels != 1 && image.channels != 3) {
    throw ValidationError("unsupported channel count: " +
                          std::to_string(image.channels));
  }
  Tensor t({3, image.height, image.width});
  for (int c = 0; c < 3; ++c) {
    const int src_c = image.channels == 1 ? 0 : c;
    const double mean = config.channel_mean[c];
    const double inv_std = 1.0 / config.channel_std[c];
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) {
        const double v = image.at(y, x, src_c) / 255.0;
        t.at(c, y, x) = static_cast<float>((v - mean) * inv_std);
      }
    }
  }
  return t;
}

}  // namespace cxr
