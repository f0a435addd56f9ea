#pragma once

#include <cstdint>
#include <vector>

#include "meshstyle/geometry.hpp"

namespace meshstyle {

// Row-major RGB image with channels in [0,1]. Row 0 is the top of the
// image; texture coordinate v=0 maps to the bottom row when sampling.
struct TextureImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // width * height * 3

  static TextureImage filled(int w, int h, const Vec3& color);

  double& at(int x, int y, int c) { return pixels[3 * (std::size_t(y) * width + x) + c]; }
  double at(int x, int y, int c) const { return pixels[3 * (std::size_t(y) * width + x) + c]; }
  Vec3 pixel(int x, int y) const {
    const std::size_t i = 3 * (std::size_t(y) * width + x);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set_pixel(int x, int y, const Vec3& c) {
    const std::size_t i = 3 * (std::size_t(y) * width + x);
    pixels[i] = c.x();
    pixels[i + 1] = c.y();
    pixels[i + 2] = c.z();
  }
  std::size_t pixel_count() const { return std::size_t(width) * height; }
};

struct BoolImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 0 or 1, row-major

  static BoolImage filled(int w, int h, bool value);

  bool at(int x, int y) const { return data[std::size_t(y) * width + x] != 0; }
  void set(int x, int y, bool v) { data[std::size_t(y) * width + x] = v ? 1 : 0; }
  std::size_t count_true() const;
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  static GrayImage zeros(int w, int h);
  double& at(int x, int y) { return data[std::size_t(y) * width + x]; }
  double at(int x, int y) const { return data[std::size_t(y) * width + x]; }
};

// Bilinear sample with clamp-to-edge addressing. (u,v) in [0,1]^2, v=0 at
// the bottom row.
Vec3 sample_bilinear(const TextureImage& image, double u, double v);

inline double luminance(const Vec3& rgb) {
  return 0.299 * rgb.x() + 0.587 * rgb.y() + 0.114 * rgb.z();
}

GrayImage luminance_image(const TextureImage& image);

}  // namespace meshstyle
