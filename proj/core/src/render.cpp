#include "meshstyle/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "meshstyle/errors.hpp"
#include "meshstyle/parallel.hpp"

namespace meshstyle {

namespace {

constexpr double kNearPlane = 1e-6;
constexpr int kBandRows = 32;
const Vec3 kBackground(0.5, 0.5, 0.5);
const Vec3 kUntexturedAlbedo(0.7, 0.7, 0.7);

struct CameraBasis {
  Vec3 position;
  Vec3 right, up, forward;
  double tan_half;
  int resolution;
};

CameraBasis make_basis(const Camera& cam) {
  if ((cam.target - cam.position).squaredNorm() < 1e-24)
    throw data_error("rasterize: camera position equals its target");
  if (!(cam.fov_deg > 0.0 && cam.fov_deg < 180.0))
    throw data_error("rasterize: field of view out of range");
  if (cam.resolution < 1) throw data_error("rasterize: resolution must be positive");

  CameraBasis b;
  b.position = cam.position;
  b.forward = (cam.target - cam.position).normalized();
  Vec3 right = b.forward.cross(cam.up);
  if (right.squaredNorm() < 1e-18) right = b.forward.cross(Vec3(0, 0, 1));
  if (right.squaredNorm() < 1e-18) right = b.forward.cross(Vec3(1, 0, 0));
  b.right = right.normalized();
  b.up = b.right.cross(b.forward);
  b.tan_half = std::tan(0.5 * cam.fov_deg * std::numbers::pi / 180.0);
  b.resolution = cam.resolution;
  return b;
}

struct ClipVertex {
  Vec3 cam;
  Vec2 uv;
};

// Clips a camera-space triangle against the near plane z = kNearPlane;
// returns 0, 3, or 4 vertices.
int clip_near(const ClipVertex in[3], ClipVertex out[4]) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& a = in[i];
    const ClipVertex& b = in[(i + 1) % 3];
    const bool a_in = a.cam.z() >= kNearPlane;
    const bool b_in = b.cam.z() >= kNearPlane;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const double t = (kNearPlane - a.cam.z()) / (b.cam.z() - a.cam.z());
      ClipVertex v;
      v.cam = a.cam + t * (b.cam - a.cam);
      v.uv = a.uv + t * (b.uv - a.uv);
      out[n++] = v;
    }
  }
  return n;
}

struct ScreenTriangle {
  double x[3], y[3];
  double inv_z[3];
  double u_over_z[3], v_over_z[3];
  int min_x, max_x, min_y, max_y;
};

}  // namespace

std::vector<Camera> camera_ring_around(const Bbox3& bounds, int views, double elevation_deg,
                                       int resolution) {
  if (views < 1) throw data_error("camera_ring: need at least one view");
  const double diagonal = bounds.diagonal();
  if (!(diagonal > 0.0)) throw data_error("camera_ring: degenerate bounding box");

  const Vec3 center = bounds.center();
  const double radius = 1.8 * diagonal;
  const double elevation = elevation_deg * std::numbers::pi / 180.0;

  std::vector<Camera> cams;
  cams.reserve(views);
  for (int k = 0; k < views; ++k) {
    const double azimuth = 2.0 * std::numbers::pi * double(k) / double(views);
    Camera cam;
    cam.position = center + radius * Vec3(std::cos(elevation) * std::sin(azimuth),
                                          std::sin(elevation),
                                          std::cos(elevation) * std::cos(azimuth));
    cam.target = center;
    cam.resolution = resolution;
    cams.push_back(cam);
  }
  return cams;
}

std::vector<Camera> camera_ring(const TexturedMesh& mesh, int views, double elevation_deg,
                                int resolution) {
  return camera_ring_around(mesh.bounds(), views, elevation_deg, resolution);
}

RenderOutput rasterize(const TexturedMesh& mesh, const TextureImage* texture, const Camera& cam) {
  if (texture && !mesh.has_uvs())
    throw data_error("rasterize: texture given but the mesh has no UVs");

  const CameraBasis basis = make_basis(cam);
  const int size = basis.resolution;

  RenderOutput out;
  out.rgb = TextureImage::filled(size, size, kBackground);
  out.mask = BoolImage::filled(size, size, false);
  out.depth = GrayImage::zeros(size, size);
  std::fill(out.depth.data.begin(), out.depth.data.end(),
            std::numeric_limits<double>::infinity());

  // Clip and project every face up front, in face order, so that each image
  // band can replay the same deterministic triangle sequence.
  std::vector<ScreenTriangle> tris;
  tris.reserve(mesh.faces.size());
  for (const Face& face : mesh.faces) {
    ClipVertex corners[3];
    for (int k = 0; k < 3; ++k) {
      const Vec3 d = mesh.vertices[face.v[k]] - basis.position;
      corners[k].cam = Vec3(basis.right.dot(d), basis.up.dot(d), basis.forward.dot(d));
      corners[k].uv = texture ? mesh.uvs[face.uv[k]] : Vec2(0, 0);
    }
    ClipVertex poly[4];
    const int n = clip_near(corners, poly);
    for (int t = 0; t + 2 < n; ++t) {
      const ClipVertex* v[3] = {&poly[0], &poly[t + 1], &poly[t + 2]};
      ScreenTriangle tri;
      double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
      double min_y = min_x, max_y = -min_x;
      for (int k = 0; k < 3; ++k) {
        const double z = v[k]->cam.z();
        const double x_ndc = v[k]->cam.x() / (z * basis.tan_half);
        const double y_ndc = v[k]->cam.y() / (z * basis.tan_half);
        tri.x[k] = (x_ndc + 1.0) * 0.5 * size - 0.5;
        tri.y[k] = (1.0 - y_ndc) * 0.5 * size - 0.5;
        tri.inv_z[k] = 1.0 / z;
        tri.u_over_z[k] = v[k]->uv.x() / z;
        tri.v_over_z[k] = v[k]->uv.y() / z;
        min_x = std::min(min_x, tri.x[k]);
        max_x = std::max(max_x, tri.x[k]);
        min_y = std::min(min_y, tri.y[k]);
        max_y = std::max(max_y, tri.y[k]);
      }
      tri.min_x = std::max(0, int(std::ceil(min_x)));
      tri.max_x = std::min(size - 1, int(std::floor(max_x)));
      tri.min_y = std::max(0, int(std::ceil(min_y)));
      tri.max_y = std::min(size - 1, int(std::floor(max_y)));
      if (tri.min_x > tri.max_x || tri.min_y > tri.max_y) continue;
      tris.push_back(tri);
    }
  }

  const int bands = (size + kBandRows - 1) / kBandRows;
  parallel_for(std::size_t(bands), [&](std::size_t band) {
    const int row_lo = int(band) * kBandRows;
    const int row_hi = std::min(size, row_lo + kBandRows);
    for (const ScreenTriangle& tri : tris) {
      const int y0 = std::max(tri.min_y, row_lo);
      const int y1 = std::min(tri.max_y, row_hi - 1);
      if (y0 > y1) continue;

      const double area = (tri.x[1] - tri.x[0]) * (tri.y[2] - tri.y[0]) -
                          (tri.x[2] - tri.x[0]) * (tri.y[1] - tri.y[0]);
      if (area == 0.0) continue;
      const double sign = area > 0.0 ? 1.0 : -1.0;
      const double inv_area = 1.0 / (sign * area);

      for (int y = y0; y <= y1; ++y) {
        for (int x = tri.min_x; x <= tri.max_x; ++x) {
          const double px = double(x), py = double(y);
          const double w0 = sign * ((tri.x[2] - tri.x[1]) * (py - tri.y[1]) -
                                    (tri.y[2] - tri.y[1]) * (px - tri.x[1]));
          const double w1 = sign * ((tri.x[0] - tri.x[2]) * (py - tri.y[2]) -
                                    (tri.y[0] - tri.y[2]) * (px - tri.x[2]));
          const double w2 = sign * ((tri.x[1] - tri.x[0]) * (py - tri.y[0]) -
                                    (tri.y[1] - tri.y[0]) * (px - tri.x[0]));
          if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
          const double l0 = w0 * inv_area, l1 = w1 * inv_area, l2 = w2 * inv_area;
          const double inv_z = l0 * tri.inv_z[0] + l1 * tri.inv_z[1] + l2 * tri.inv_z[2];
          if (!(inv_z > 0.0)) continue;
          const double z = 1.0 / inv_z;
          if (z >= out.depth.at(x, y)) continue;
          Vec3 color = kUntexturedAlbedo;
          if (texture) {
            const double u =
                (l0 * tri.u_over_z[0] + l1 * tri.u_over_z[1] + l2 * tri.u_over_z[2]) / inv_z;
            const double v =
                (l0 * tri.v_over_z[0] + l1 * tri.v_over_z[1] + l2 * tri.v_over_z[2]) / inv_z;
            color = sample_bilinear(*texture, u, v);
          }
          out.depth.at(x, y) = z;
          out.rgb.set_pixel(x, y, color);
          out.mask.set(x, y, true);
        }
      }
    }
  }, 1);

  return out;
}

std::vector<RenderOutput> render_all(const TexturedMesh& mesh, const TextureImage* texture,
                                     std::span<const Camera> cams) {
  std::vector<RenderOutput> out;
  out.reserve(cams.size());
  for (const Camera& cam : cams) out.push_back(rasterize(mesh, texture, cam));
  return out;
}

}  // namespace meshstyle
