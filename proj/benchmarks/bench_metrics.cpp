#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "meshstyle/metrics.hpp"
#include "meshstyle/nn_index.hpp"

using namespace meshstyle;

namespace {

std::vector<Vec3> cloud(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> points(n);
  for (Vec3& p : points) p = Vec3(u(rng), u(rng), u(rng));
  return points;
}

LabeledPointSet labeled_cloud(int n, int parts, std::uint64_t seed) {
  LabeledPointSet set;
  set.points = cloud(n, seed);
  set.labels.resize(n);
  for (int i = 0; i < n; ++i) set.labels[i] = i % parts;
  for (int k = 0; k < parts; ++k) set.part_names.push_back("part" + std::to_string(k));
  return set;
}

void bm_nn_build(benchmark::State& state) {
  const std::vector<Vec3> points = cloud(int(state.range(0)), 1);
  for (auto _ : state) {
    NnIndex index(points, Metric::l1);
    benchmark::DoNotOptimize(index);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_nn_build)->Arg(1000)->Arg(10000)->Arg(100000);

void bm_nn_query(benchmark::State& state) {
  const std::vector<Vec3> points = cloud(int(state.range(0)), 2);
  const std::vector<Vec3> queries = cloud(1000, 3);
  const NnIndex index(points, Metric::l1);
  for (auto _ : state)
    for (const Vec3& q : queries) benchmark::DoNotOptimize(index.nearest(q));
  state.SetItemsProcessed(state.iterations() * queries.size());
}
BENCHMARK(bm_nn_query)->Arg(1000)->Arg(10000)->Arg(100000);

void bm_chamfer_l1(benchmark::State& state) {
  const int n = int(state.range(0));
  const std::vector<Vec3> p = cloud(n, 4);
  const std::vector<Vec3> q = cloud(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer_l1(p, q));
  state.SetItemsProcessed(state.iterations() * 2 * n);
}
BENCHMARK(bm_chamfer_l1)->Arg(1000)->Arg(4096)->Arg(16384);

void bm_part_distance(benchmark::State& state) {
  const int n = int(state.range(0));
  const LabeledPointSet p = labeled_cloud(n, 6, 6);
  const LabeledPointSet q = labeled_cloud(n, 6, 7);
  for (auto _ : state) benchmark::DoNotOptimize(part_distance(p, q));
  state.SetItemsProcessed(state.iterations() * 2 * n);
}
BENCHMARK(bm_part_distance)->Arg(1000)->Arg(4096)->Arg(16384);

void bm_f_score(benchmark::State& state) {
  const int n = int(state.range(0));
  const std::vector<Vec3> p = cloud(n, 8);
  const std::vector<Vec3> q = cloud(n, 9);
  for (auto _ : state) benchmark::DoNotOptimize(f_score(p, q, 0.05));
  state.SetItemsProcessed(state.iterations() * 2 * n);
}
BENCHMARK(bm_f_score)->Arg(1000)->Arg(4096)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
