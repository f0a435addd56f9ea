#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "meshstyle/render.hpp"
#include "meshstyle/texture_style.hpp"

using namespace meshstyle;

namespace {

// latitude/longitude sphere with enough triangles to exercise the raster loop
TexturedMesh make_sphere(int stacks, int slices) {
  TexturedMesh mesh;
  for (int i = 0; i <= stacks; ++i) {
    const double phi = M_PI * double(i) / double(stacks);
    for (int j = 0; j <= slices; ++j) {
      const double theta = 2.0 * M_PI * double(j) / double(slices);
      mesh.vertices.emplace_back(std::sin(phi) * std::cos(theta), std::cos(phi),
                                 std::sin(phi) * std::sin(theta));
      mesh.uvs.emplace_back(double(j) / double(slices), 1.0 - double(i) / double(stacks));
    }
  }
  const int stride = slices + 1;
  for (int i = 0; i < stacks; ++i)
    for (int j = 0; j < slices; ++j) {
      const int a = i * stride + j;
      Face f1, f2;
      f1.v = {a, a + stride, a + 1};
      f1.uv = f1.v;
      f2.v = {a + 1, a + stride, a + stride + 1};
      f2.uv = f2.v;
      mesh.faces.push_back(f1);
      mesh.faces.push_back(f2);
    }
  return mesh;
}

TextureImage checker(int size) {
  TextureImage tex = TextureImage::filled(size, size, Vec3::Zero());
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      tex.set_pixel(x, y, ((x / 8 + y / 8) % 2) ? Vec3(0.9, 0.2, 0.1) : Vec3(0.1, 0.2, 0.9));
  return tex;
}

void bm_rasterize(benchmark::State& state) {
  const TexturedMesh sphere = make_sphere(48, 96);
  const int res = int(state.range(0));
  const Camera cam = camera_ring(sphere, 1, 20.0, res)[0];
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(sphere, nullptr, cam));
  state.SetItemsProcessed(state.iterations() * res * res);
}
BENCHMARK(bm_rasterize)->Arg(128)->Arg(256)->Arg(512);

void bm_rasterize_textured(benchmark::State& state) {
  const TexturedMesh sphere = make_sphere(48, 96);
  const TextureImage tex = checker(256);
  const int res = int(state.range(0));
  const Camera cam = camera_ring(sphere, 1, 20.0, res)[0];
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(sphere, &tex, cam));
  state.SetItemsProcessed(state.iterations() * res * res);
}
BENCHMARK(bm_rasterize_textured)->Arg(128)->Arg(256)->Arg(512);

void bm_masked_blur(benchmark::State& state) {
  const TexturedMesh sphere = make_sphere(48, 96);
  const int res = int(state.range(0));
  const Camera cam = camera_ring(sphere, 1, 20.0, res)[0];
  const RenderOutput out = rasterize(sphere, nullptr, cam);
  for (auto _ : state) benchmark::DoNotOptimize(masked_blur(out.rgb, out.mask));
  state.SetItemsProcessed(state.iterations() * res * res);
}
BENCHMARK(bm_masked_blur)->Arg(128)->Arg(256)->Arg(512);

void bm_pyramid_features(benchmark::State& state) {
  const TexturedMesh sphere = make_sphere(48, 96);
  const TextureImage tex = checker(256);
  const int res = int(state.range(0));
  const Camera cam = camera_ring(sphere, 1, 20.0, res)[0];
  const RenderOutput out = rasterize(sphere, &tex, cam);
  for (auto _ : state) benchmark::DoNotOptimize(pyramid_features(out.rgb, out.mask));
  state.SetItemsProcessed(state.iterations() * res * res);
}
BENCHMARK(bm_pyramid_features)->Arg(128)->Arg(256)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
