#pragma once

// Shared scene setup for the benchmarks: a KITTI-like spinning sensor in a
// street canyon, dense enough for the default voting resolution.

#include <memory>
#include <vector>

#include "densedepth/doc.hpp"
#include "densedepth/geometry.hpp"
#include "support/helpers.hpp"

namespace bench {

inline helpers::StreetSceneOptions dense_sensor_options(int frames) {
  helpers::StreetSceneOptions opt;
  opt.frames = frames;
  opt.beams = 64;
  opt.beam_lo_deg = -24.8;
  opt.beam_hi_deg = 2.0;
  opt.azimuth_steps = 1875;
  opt.max_range = 80.0;
  opt.movers = 2;
  return opt;
}

struct VotingFixture {
  densedepth::synth::SceneScript scene;
  std::vector<std::shared_ptr<densedepth::PointCloud>> frames;
  std::unique_ptr<densedepth::Trajectory> traj;
  std::unique_ptr<densedepth::doc::KeyImageCache> images;

  explicit VotingFixture(int frame_count) {
    using namespace densedepth;
    scene = helpers::street_scene(dense_sensor_options(frame_count));
    traj = std::make_unique<Trajectory>(scene.trajectory);
    for (std::size_t i = 0; i < scene.trajectory.size(); ++i) {
      auto ft = synth::raycast_frame(scene, scene.trajectory[i].timestamp,
                                     scene.trajectory[i], i);
      auto cloud = std::make_shared<PointCloud>(std::move(ft.cloud));
      cloud->labels = std::move(ft.labels);  // truth labels stand in for ground flags
      frames.push_back(std::move(cloud));
    }
    images = std::make_unique<doc::KeyImageCache>(
        [this](int i) { return frames[i]; }, doc::VotingParams{}, 256);
  }
};

}  // namespace bench
