#pragma once

#include <span>
#include <vector>

#include "meshstyle/geometry.hpp"
#include "meshstyle/image.hpp"
#include "meshstyle/mesh.hpp"

namespace meshstyle {

struct Camera {
  Vec3 position = Vec3(0, 0, 1);
  Vec3 target = Vec3::Zero();
  Vec3 up = Vec3(0, 1, 0);
  double fov_deg = 40.0;  // vertical field of view
  int resolution = 256;   // square image
};

struct RenderOutput {
  TextureImage rgb;  // background constant (0.5, 0.5, 0.5)
  BoolImage mask;    // true where geometry covers the pixel
  GrayImage depth;   // view-space depth, +infinity on background
};

// Cameras at equal azimuth spacing looking at the box center, at the given
// elevation, radius 1.8 x box diagonal. Azimuth 0 sits on the +Z axis.
std::vector<Camera> camera_ring_around(const Bbox3& bounds, int views, double elevation_deg,
                                       int resolution);
std::vector<Camera> camera_ring(const TexturedMesh& mesh, int views, double elevation_deg,
                                int resolution);

// Deterministic software rasterizer: perspective projection, no back-face
// culling, z-buffer, perspective-correct UV interpolation, bilinear texture
// sampling, unlit albedo shading. Pass texture = nullptr for flat 0.7 gray.
// Output is bit-identical across runs and thread counts.
RenderOutput rasterize(const TexturedMesh& mesh, const TextureImage* texture, const Camera& cam);

std::vector<RenderOutput> render_all(const TexturedMesh& mesh, const TextureImage* texture,
                                     std::span<const Camera> cams);

}  // namespace meshstyle
