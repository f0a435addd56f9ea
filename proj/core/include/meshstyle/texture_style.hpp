#pragma once

#include <span>
#include <vector>

#include "meshstyle/geometry.hpp"
#include "meshstyle/image.hpp"
#include "meshstyle/mesh.hpp"
#include "meshstyle/render.hpp"

namespace meshstyle {

// Masked per-channel moments (population covariance).
struct ColorStats {
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Zero();
  std::size_t pixel_count = 0;
};

// Global color-space affine; applied per pixel as clamp(linear*c + bias).
struct ColorTransform {
  Mat3 linear = Mat3::Identity();
  Vec3 bias = Vec3::Zero();

  Vec3 apply(const Vec3& c) const {
    const Vec3 t = linear * c + bias;
    return t.cwiseMax(0.0).cwiseMin(1.0);
  }
};

// Texel is true iff its center lies inside at least one face's UV triangle,
// under the same texel-center convention the bilinear sampler uses.
BoolImage uv_coverage_mask(const TexturedMesh& mesh, int width, int height);
inline BoolImage uv_coverage_mask(const TexturedMesh& mesh, int texture_size) {
  return uv_coverage_mask(mesh, texture_size, texture_size);
}

ColorStats color_stats(const TextureImage& image, const BoolImage& mask);

// Whitening-coloring solve: linear = tgt_cov^(1/2) * src_cov^(-1/2) via
// symmetric eigendecompositions, bias = tgt_mean - linear * src_mean. The
// source covariance is regularized with 1e-6*identity only when its
// smallest eigenvalue falls below 1e-6, so well-conditioned inputs map
// source moments to target moments exactly.
ColorTransform solve_wct(const ColorStats& src, const ColorStats& tgt);

// Transforms masked texels, clamps to [0,1]; unmasked texels untouched.
TextureImage apply_color_transform(const TextureImage& texture, const BoolImage& mask,
                                   const ColorTransform& t);

// 5x5 Gaussian blur (sigma 1) with the weights renormalized over the taps
// inside the mask: masked outputs never read unmasked pixels, constants are
// preserved, and affine color maps commute with the blur.
TextureImage masked_blur(const TextureImage& image, const BoolImage& mask);

// Stride-2 decimation of a blurred image; a coarse pixel stays masked when
// at least half of its source block is masked.
struct DownsampledImage {
  TextureImage image;
  BoolImage mask;
};
DownsampledImage downsample_masked(const TextureImage& blurred, const BoolImage& mask);

// Level 0: masked stats of the input. Each further level: masked blur,
// stride-2 downsample of image and mask, masked stats. Truncated with a
// warning when a level's mask drops below 4 pixels.
struct PyramidFeatures {
  std::vector<ColorStats> levels;
};
PyramidFeatures pyramid_features(const TextureImage& rgb, const BoolImage& mask, int levels = 4);

// Sum over views and shared levels of squared mean distance plus squared
// Frobenius covariance distance.
double style_loss(std::span<const PyramidFeatures> a, std::span<const PyramidFeatures> b);

// Mean over views of the mean squared blurred-luminance difference over the
// mask intersection; a view with no overlap contributes zero.
double content_loss(std::span<const RenderOutput> a, std::span<const RenderOutput> b);

}  // namespace meshstyle
