#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "densedepth/render.hpp"

using namespace densedepth;

static void BM_RenderDepth(benchmark::State& state) {
  static bench::VotingFixture fx(40);
  Trajectory& traj = *fx.traj;
  double t_cam = 0.5 * (traj.t_first() + traj.t_last()) + 0.013;

  render::RenderParams params;
  auto sel = render::select_render_frames(traj, t_cam, params);
  std::vector<render::FrameRef> static_frames;
  for (int k : sel.static_frames) static_frames.push_back({fx.frames[k].get(), traj[k]});
  render::FrameRef dyn{fx.frames[sel.dynamic_frame].get(), traj[sel.dynamic_frame]};
  Pose cam_pose = traj.interpolate(t_cam);
  CameraRig rig = helpers::simple_rig(640, 480, 520.0);

  std::size_t total_points = 0;
  for (const auto& f : static_frames) total_points += f.cloud->size();

  for (auto _ : state) {
    DepthMap map = render::render_depth(static_frames, dyn, cam_pose, rig, params);
    benchmark::DoNotOptimize(map);
  }
  state.SetItemsProcessed(state.iterations() * total_points);
  state.counters["frames"] = static_cast<double>(static_frames.size());
}
BENCHMARK(BM_RenderDepth)->Unit(benchmark::kMillisecond);
