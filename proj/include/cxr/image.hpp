#ifndef CXR_IMAGE_HPP
#define CXR_IMAGE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace cxr {

// Intensity image, H x W x C, values in [0, 255] as float. C is 1 or 3.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> pixels;  // row-major, interleaved channels

  Image() = default;
  Image(int h, int w, int c)
      : height(h), width(w), channels(c),
        pixels(static_cast<std::size_t>(h) * w * c, 0.0f) {}

  float& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool empty() const { return pixels.empty(); }
};

// Decode PNG/JPEG from disk. Grayscale files load as 1 channel, color as 3
// (RGB order). Throws std::runtime_error on failure.
Image load_image(const std::string& path);

// True if the file decodes without error.
bool image_decodable(const std::string& path);

// Image dimensions without keeping the pixels.
bool probe_image(const std::string& path, int& width, int& height);

// Write as 8-bit PNG (values clamped to [0,255]).
void save_png(const std::string& path, const Image& img);

}  // namespace cxr

#endif
