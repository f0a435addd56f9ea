#include "meshstyle/texture_style.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meshstyle/errors.hpp"

namespace meshstyle {

namespace {

constexpr double kWctEigenFloor = 1e-6;

void require_same_size(int w1, int h1, int w2, int h2, const char* who) {
  if (w1 != w2 || h1 != h2)
    throw data_error(std::string(who) + ": image and mask dimensions differ");
}

// Symmetric eigendecomposition with eigenvalues clamped at zero.
void spd_eigen(const Mat3& m, Mat3& vectors, Vec3& values) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (m + m.transpose()));
  vectors = es.eigenvectors();
  values = es.eigenvalues().cwiseMax(0.0);
}

}  // namespace

BoolImage uv_coverage_mask(const TexturedMesh& mesh, int width, int height) {
  if (width < 1 || height < 1) throw data_error("uv_coverage_mask: empty texture size");
  if (!mesh.has_uvs()) throw data_error("uv_coverage_mask: mesh has no UVs");

  BoolImage mask = BoolImage::filled(width, height, false);
  for (const Face& face : mesh.faces) {
    double px[3], py[3];
    for (int k = 0; k < 3; ++k) {
      const Vec2& uv = mesh.uvs[face.uv[k]];
      px[k] = uv.x() * width - 0.5;
      py[k] = (1.0 - uv.y()) * height - 0.5;
    }
    const double area = (px[1] - px[0]) * (py[2] - py[0]) - (px[2] - px[0]) * (py[1] - py[0]);
    if (area == 0.0) continue;
    const double sign = area > 0.0 ? 1.0 : -1.0;

    const int x0 = std::max(0, int(std::ceil(std::min({px[0], px[1], px[2]}))));
    const int x1 = std::min(width - 1, int(std::floor(std::max({px[0], px[1], px[2]}))));
    const int y0 = std::max(0, int(std::ceil(std::min({py[0], py[1], py[2]}))));
    const int y1 = std::min(height - 1, int(std::floor(std::max({py[0], py[1], py[2]}))));

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double cx = double(x), cy = double(y);
        const double w0 = sign * ((px[2] - px[1]) * (cy - py[1]) - (py[2] - py[1]) * (cx - px[1]));
        const double w1 = sign * ((px[0] - px[2]) * (cy - py[2]) - (py[0] - py[2]) * (cx - px[2]));
        const double w2 = sign * ((px[1] - px[0]) * (cy - py[0]) - (py[1] - py[0]) * (cx - px[0]));
        if (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0) mask.set(x, y, true);
      }
    }
  }
  return mask;
}

ColorStats color_stats(const TextureImage& image, const BoolImage& mask) {
  require_same_size(image.width, image.height, mask.width, mask.height, "color_stats");
  const std::size_t count = mask.count_true();
  if (count < 4) throw data_error("color_stats: need at least 4 masked pixels");

  ColorStats stats;
  stats.pixel_count = count;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      if (mask.at(x, y)) stats.mean += image.pixel(x, y);
  stats.mean /= double(count);

  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      if (mask.at(x, y)) {
        const Vec3 d = image.pixel(x, y) - stats.mean;
        stats.covariance += d * d.transpose();
      }
  stats.covariance /= double(count);
  return stats;
}

ColorTransform solve_wct(const ColorStats& src, const ColorStats& tgt) {
  Mat3 vectors;
  Vec3 values;
  spd_eigen(src.covariance, vectors, values);
  if (values.minCoeff() < kWctEigenFloor) {
    // Degenerate source statistics: regularize before inverting.
    spd_eigen(src.covariance + kWctEigenFloor * Mat3::Identity(), vectors, values);
  }
  Vec3 inv_sqrt;
  for (int k = 0; k < 3; ++k) inv_sqrt[k] = 1.0 / std::sqrt(values[k]);
  const Mat3 whiten = vectors * inv_sqrt.asDiagonal() * vectors.transpose();

  spd_eigen(tgt.covariance, vectors, values);
  Vec3 sqrt_t;
  for (int k = 0; k < 3; ++k) sqrt_t[k] = std::sqrt(values[k]);
  const Mat3 color = vectors * sqrt_t.asDiagonal() * vectors.transpose();

  ColorTransform t;
  t.linear = color * whiten;
  t.bias = tgt.mean - t.linear * src.mean;
  return t;
}

TextureImage apply_color_transform(const TextureImage& texture, const BoolImage& mask,
                                   const ColorTransform& t) {
  require_same_size(texture.width, texture.height, mask.width, mask.height,
                    "apply_color_transform");
  TextureImage out = texture;
  for (int y = 0; y < texture.height; ++y)
    for (int x = 0; x < texture.width; ++x)
      if (mask.at(x, y)) out.set_pixel(x, y, t.apply(texture.pixel(x, y)));
  return out;
}

TextureImage masked_blur(const TextureImage& image, const BoolImage& mask) {
  require_same_size(image.width, image.height, mask.width, mask.height, "masked_blur");

  // 1D Gaussian taps for sigma = 1 at offsets -2..2.
  double taps[5];
  for (int k = -2; k <= 2; ++k) taps[k + 2] = std::exp(-0.5 * double(k * k));

  TextureImage out = TextureImage::filled(image.width, image.height, Vec3::Zero());
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      Vec3 acc = Vec3::Zero();
      double weight = 0.0;
      for (int dy = -2; dy <= 2; ++dy) {
        const int sy = y + dy;
        if (sy < 0 || sy >= image.height) continue;
        for (int dx = -2; dx <= 2; ++dx) {
          const int sx = x + dx;
          if (sx < 0 || sx >= image.width) continue;
          if (!mask.at(sx, sy)) continue;
          const double w = taps[dx + 2] * taps[dy + 2];
          acc += w * image.pixel(sx, sy);
          weight += w;
        }
      }
      if (weight > 0.0) out.set_pixel(x, y, acc / weight);
    }
  }
  return out;
}

DownsampledImage downsample_masked(const TextureImage& blurred, const BoolImage& mask) {
  require_same_size(blurred.width, blurred.height, mask.width, mask.height, "downsample_masked");

  DownsampledImage out;
  const int w = (blurred.width + 1) / 2;
  const int h = (blurred.height + 1) / 2;
  out.image = TextureImage::filled(w, h, Vec3::Zero());
  out.mask = BoolImage::filled(w, h, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.image.set_pixel(x, y, blurred.pixel(2 * x, 2 * y));
      int covered = 0, cells = 0;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const int sx = 2 * x + dx, sy = 2 * y + dy;
          if (sx >= blurred.width || sy >= blurred.height) continue;
          ++cells;
          if (mask.at(sx, sy)) ++covered;
        }
      if (2 * covered >= cells && covered > 0) out.mask.set(x, y, true);
    }
  }
  return out;
}

PyramidFeatures pyramid_features(const TextureImage& rgb, const BoolImage& mask, int levels) {
  if (levels < 1) throw data_error("pyramid_features: need at least one level");

  PyramidFeatures features;
  features.levels.push_back(color_stats(rgb, mask));

  TextureImage image = rgb;
  BoolImage current = mask;
  for (int level = 1; level < levels; ++level) {
    DownsampledImage down = downsample_masked(masked_blur(image, current), current);
    if (down.mask.count_true() < 4) {
      warn("pyramid_features: mask vanished, truncating at level " + std::to_string(level));
      break;
    }
    features.levels.push_back(color_stats(down.image, down.mask));
    image = std::move(down.image);
    current = std::move(down.mask);
  }
  return features;
}

double style_loss(std::span<const PyramidFeatures> a, std::span<const PyramidFeatures> b) {
  if (a.empty() || b.empty()) throw data_error("style_loss: empty view list");
  if (a.size() != b.size()) throw data_error("style_loss: view counts differ");

  double total = 0.0;
  for (std::size_t v = 0; v < a.size(); ++v) {
    const std::size_t shared = std::min(a[v].levels.size(), b[v].levels.size());
    if (shared == 0) throw data_error("style_loss: empty feature pyramid");
    for (std::size_t level = 0; level < shared; ++level) {
      const ColorStats& fa = a[v].levels[level];
      const ColorStats& fb = b[v].levels[level];
      total += (fa.mean - fb.mean).squaredNorm() + (fa.covariance - fb.covariance).squaredNorm();
    }
  }
  return total;
}

double content_loss(std::span<const RenderOutput> a, std::span<const RenderOutput> b) {
  if (a.size() != b.size()) throw data_error("content_loss: view counts differ");
  if (a.empty()) {
    warn("content_loss: no views");
    return 0.0;
  }

  double total = 0.0;
  std::size_t contributing = 0;
  for (std::size_t v = 0; v < a.size(); ++v) {
    require_same_size(a[v].rgb.width, a[v].rgb.height, b[v].rgb.width, b[v].rgb.height,
                      "content_loss");
    const TextureImage blurred_a = masked_blur(a[v].rgb, a[v].mask);
    const TextureImage blurred_b = masked_blur(b[v].rgb, b[v].mask);
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < blurred_a.height; ++y)
      for (int x = 0; x < blurred_a.width; ++x) {
        if (!a[v].mask.at(x, y) || !b[v].mask.at(x, y)) continue;
        const double d = luminance(blurred_a.pixel(x, y)) - luminance(blurred_b.pixel(x, y));
        sum += d * d;
        ++n;
      }
    if (n == 0) continue;
    total += sum / double(n);
    ++contributing;
  }
  if (contributing == 0) warn("content_loss: no overlapping foreground in any view");
  return total / double(a.size());
}

}  // namespace meshstyle
