#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "meshstyle/part_field.hpp"
#include "meshstyle/warp.hpp"

using namespace meshstyle;

namespace {

std::vector<Ellipsoid> random_ellipsoids(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> center(-2.0, 2.0);
  std::uniform_real_distribution<double> axis(0.3, 1.5);
  std::vector<Ellipsoid> ells(m);
  for (Ellipsoid& e : ells) {
    e.center = Vec3(center(rng), center(rng), center(rng));
    Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
    e.rotation = q.normalized().toRotationMatrix();
    e.semi_axes = Vec3(axis(rng), axis(rng), axis(rng));
  }
  return ells;
}

std::vector<Vec3> random_points(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Vec3> points(n);
  for (Vec3& p : points) p = Vec3(u(rng), u(rng), u(rng));
  return points;
}

void bm_fit_ellipsoid(benchmark::State& state) {
  const std::vector<Vec3> points = random_points(int(state.range(0)), 11);
  for (auto _ : state) benchmark::DoNotOptimize(fit_ellipsoid(points));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_fit_ellipsoid)->Arg(1000)->Arg(10000)->Arg(100000);

void bm_blend_weights(benchmark::State& state) {
  const std::vector<Ellipsoid> ells = random_ellipsoids(int(state.range(0)), 12);
  const std::vector<Vec3> points = random_points(4096, 13);
  for (auto _ : state)
    benchmark::DoNotOptimize(compute_blend_weights(points, ells, 4.0));
  state.SetItemsProcessed(state.iterations() * points.size());
}
BENCHMARK(bm_blend_weights)->Arg(2)->Arg(6)->Arg(11);

void bm_warp_points(benchmark::State& state) {
  const std::vector<Ellipsoid> ells = random_ellipsoids(6, 14);
  const std::vector<Vec3> points = random_points(int(state.range(0)), 15);
  const std::vector<BlendWeights> weights = compute_blend_weights(points, ells, 4.0);
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  PartTransforms t = PartTransforms::identity(6);
  for (auto& part : t.parts) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) part.linear(r, c) += u(rng);
    part.translation = Vec3(u(rng), u(rng), u(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(warp_points(points, weights, t));
  state.SetItemsProcessed(state.iterations() * points.size());
}
BENCHMARK(bm_warp_points)->Arg(4096)->Arg(16384)->Arg(65536);

}  // namespace

BENCHMARK_MAIN();
