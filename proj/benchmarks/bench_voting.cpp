#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "densedepth/doc.hpp"

using namespace densedepth;

namespace {

bench::VotingFixture& fixture() {
  static bench::VotingFixture fx(40);
  return fx;
}

}  // namespace

static void BM_ClassifyFrame(benchmark::State& state) {
  auto& fx = fixture();
  int query = static_cast<int>(fx.frames.size() / 2);
  // warm the key image cache outside the timed loop
  for (int j : doc::select_key_frames(*fx.traj, query, {})) fx.images->get(j);

  std::size_t points = fx.frames[query]->size();
  for (auto _ : state) {
    auto labels = doc::classify_frame(*fx.frames[query], query, *fx.traj, *fx.images,
                                      {}, {}, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(labels);
  }
  state.SetItemsProcessed(state.iterations() * points);
  state.counters["points"] = static_cast<double>(points);
}
BENCHMARK(BM_ClassifyFrame)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

static void BM_BuildKeyImage(benchmark::State& state) {
  auto& fx = fixture();
  const PointCloud& cloud = *fx.frames[0];
  doc::VotingParams vp;
  for (auto _ : state) {
    RangeImage image = build_range_image(cloud, vp.dphi, vp.dtheta);
    benchmark::DoNotOptimize(image);
  }
  state.SetItemsProcessed(state.iterations() * cloud.size());
}
BENCHMARK(BM_BuildKeyImage)->Unit(benchmark::kMillisecond);

static void BM_SingleVote(benchmark::State& state) {
  auto& fx = fixture();
  doc::VotingParams vp;
  auto image = fx.images->get(1);
  auto px = spherical_project({12.0, 1.0, -1.0}, vp.dphi, vp.dtheta);
  for (auto _ : state) {
    auto v = doc::vote(px.row, px.col, px.rho, *image, vp);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_SingleVote);
