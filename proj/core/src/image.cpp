#include "meshstyle/image.hpp"

#include <algorithm>
#include <cmath>

namespace meshstyle {

TextureImage TextureImage::filled(int w, int h, const Vec3& color) {
  TextureImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(std::size_t(w) * h * 3);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = color.x();
    img.pixels[i + 1] = color.y();
    img.pixels[i + 2] = color.z();
  }
  return img;
}

BoolImage BoolImage::filled(int w, int h, bool value) {
  BoolImage img;
  img.width = w;
  img.height = h;
  img.data.assign(std::size_t(w) * h, value ? 1 : 0);
  return img;
}

std::size_t BoolImage::count_true() const {
  std::size_t n = 0;
  for (auto v : data) n += v;
  return n;
}

GrayImage GrayImage::zeros(int w, int h) {
  GrayImage img;
  img.width = w;
  img.height = h;
  img.data.assign(std::size_t(w) * h, 0.0);
  return img;
}

Vec3 sample_bilinear(const TextureImage& image, double u, double v) {
  // Texel centers sit at (i + 0.5) / width; v is flipped so v=0 samples
  // the bottom row.
  const double fx = u * image.width - 0.5;
  const double fy = (1.0 - v) * image.height - 0.5;
  const int x0 = int(std::floor(fx));
  const int y0 = int(std::floor(fy));
  const double tx = fx - x0;
  const double ty = fy - y0;

  auto clampx = [&](int x) { return std::clamp(x, 0, image.width - 1); };
  auto clampy = [&](int y) { return std::clamp(y, 0, image.height - 1); };

  const Vec3 c00 = image.pixel(clampx(x0), clampy(y0));
  const Vec3 c10 = image.pixel(clampx(x0 + 1), clampy(y0));
  const Vec3 c01 = image.pixel(clampx(x0), clampy(y0 + 1));
  const Vec3 c11 = image.pixel(clampx(x0 + 1), clampy(y0 + 1));

  return (1.0 - ty) * ((1.0 - tx) * c00 + tx * c10) + ty * ((1.0 - tx) * c01 + tx * c11);
}

GrayImage luminance_image(const TextureImage& image) {
  GrayImage out = GrayImage::zeros(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      out.at(x, y) = luminance(image.pixel(x, y));
    }
  }
  return out;
}

}  // namespace meshstyle
