#include <benchmark/benchmark.h>

#include <random>

#include "densedepth/spatial.hpp"
#include "support/helpers.hpp"

using namespace densedepth;

static void BM_KdTreeBuild(benchmark::State& state) {
  std::mt19937_64 rng(1);
  auto cloud = helpers::random_cloud(rng, state.range(0), 50.0);
  for (auto _ : state) {
    KdTree tree(cloud.points);
    benchmark::DoNotOptimize(tree);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdTreeBuild)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

static void BM_Knn30(benchmark::State& state) {
  std::mt19937_64 rng(2);
  auto cloud = helpers::random_cloud(rng, state.range(0), 50.0);
  KdTree tree(cloud.points);
  std::size_t q = 0;
  for (auto _ : state) {
    auto nn = tree.knn(cloud.points[q % cloud.size()], 30);
    benchmark::DoNotOptimize(nn);
    ++q;
  }
}
BENCHMARK(BM_Knn30)->Arg(100000)->Arg(1000000);

static void BM_VoxelDownsample(benchmark::State& state) {
  std::mt19937_64 rng(3);
  auto cloud = helpers::random_cloud(rng, state.range(0), 50.0);
  for (auto _ : state) {
    auto down = voxel_downsample(cloud, 0.03);
    benchmark::DoNotOptimize(down);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VoxelDownsample)->Arg(1000000)->Unit(benchmark::kMillisecond);
