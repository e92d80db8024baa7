#pragma once

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "densedepth/camera.hpp"
#include "densedepth/common.hpp"
#include "densedepth/doc.hpp"
#include "densedepth/geometry.hpp"
#include "densedepth/ground.hpp"
#include "densedepth/synth.hpp"

namespace helpers {

using namespace densedepth;

inline Eigen::Vector3d random_vec(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> u(-extent, extent);
  return {u(rng), u(rng), u(rng)};
}

inline Eigen::Quaterniond random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q;
}

inline Pose random_pose(std::mt19937_64& rng, double extent = 10.0) {
  return Pose(random_vec(rng, extent), random_quat(rng));
}

inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double extent = 10.0) {
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d p = random_vec(rng, extent);
    if (p.norm() < 1e-3) p = Eigen::Vector3d(1, 0, 0);
    cloud.points.push_back(p);
  }
  return cloud;
}

/// Straight +x trajectory: n poses spaced `step` meters, `dt` seconds apart.
inline Trajectory straight_trajectory(int n, double step, double dt = 0.1,
                                      double z = 0.0) {
  std::vector<Pose> poses;
  for (int i = 0; i < n; ++i)
    poses.emplace_back(Eigen::Vector3d(i * step, 0.0, z),
                       Eigen::Quaterniond::Identity(), i * dt);
  return Trajectory(std::move(poses));
}

/// Camera looking along LiDAR +x: camera z = forward, x = right, y = down.
inline Pose camera_forward_extrinsic(const Eigen::Vector3d& offset = Eigen::Vector3d::Zero()) {
  Eigen::Matrix3d r;
  // columns: camera axes expressed in the LiDAR frame
  r.col(0) = Eigen::Vector3d(0, -1, 0);  // cam x -> lidar -y
  r.col(1) = Eigen::Vector3d(0, 0, -1);  // cam y -> lidar -z
  r.col(2) = Eigen::Vector3d(1, 0, 0);   // cam z -> lidar +x
  return Pose(offset, Eigen::Quaterniond(r));
}

inline CameraRig simple_rig(int width = 320, int height = 240, double f = 260.0,
                            const Eigen::Vector3d& offset = Eigen::Vector3d::Zero()) {
  CameraRig rig;
  rig.K << f, 0, width / 2.0, 0, f, height / 2.0, 0, 0, 1;
  rig.width = width;
  rig.height = height;
  rig.extrinsic = camera_forward_extrinsic(offset);
  return rig;
}

struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("densedepth_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

/// Street-canyon scene: ground plane, two side walls, a back wall, a couple
/// of parked boxes, and optional movers crossing the street. The sensor
/// drives straight down the middle at z = sensor_height.
struct StreetSceneOptions {
  int frames = 60;
  double frame_step = 0.5;     // meters between frames
  double frame_dt = 0.1;       // seconds between frames
  double sensor_height = 1.8;
  int beams = 24;
  double beam_lo_deg = -25.0;
  double beam_hi_deg = 8.0;
  int azimuth_steps = 700;
  double max_range = 90.0;
  double noise_sigma = 0.0;
  int movers = 0;
  double mover_speed = 3.0;  // meters per second, driving along +x
  int camera_count = 3;
  std::uint64_t seed = 7;
};

inline synth::SceneScript street_scene(const StreetSceneOptions& opt = {}) {
  synth::SceneScript scene;
  scene.seed = opt.seed;

  double length = opt.frames * opt.frame_step + 80.0;

  synth::PlanePrimitive ground;
  ground.n = Eigen::Vector3d::UnitZ();
  ground.d = 0.0;
  ground.is_ground = true;
  scene.planes.push_back(ground);

  auto wall = [&](double y) {
    synth::PlanePrimitive w;
    w.n = Eigen::Vector3d::UnitY();
    w.d = y;
    w.origin = Eigen::Vector3d(length / 2.0, y, 3.0);
    w.ext1 = length / 2.0 + 20.0;  // along x
    w.ext2 = 3.0;                  // height band 0..6
    return w;
  };
  scene.planes.push_back(wall(9.0));
  scene.planes.push_back(wall(-9.0));

  synth::PlanePrimitive back;
  back.n = Eigen::Vector3d::UnitX();
  back.d = length;
  back.origin = Eigen::Vector3d(length, 0.0, 4.0);
  back.ext1 = 12.0;
  back.ext2 = 4.0;
  scene.planes.push_back(back);

  scene.boxes.push_back({{12.0, 5.5, 0.8}, {1.0, 0.8, 0.8}});
  scene.boxes.push_back({{26.0, -5.0, 1.0}, {1.2, 0.9, 1.0}});

  // Movers drive along the street for the whole sequence, like traffic, so
  // none of them is ever temporarily static.
  double t_end = opt.frames * opt.frame_dt;
  for (int m = 0; m < opt.movers; ++m) {
    synth::Mover mover;
    mover.box.half = {1.0, 0.9, 0.8};
    double lane = (m % 2 == 0) ? -3.0 : 3.0;
    double x0 = 10.0 + 8.0 * m;
    Pose a(Eigen::Vector3d(x0, lane, 0.9), Eigen::Quaterniond::Identity(), -1.0);
    Pose b(Eigen::Vector3d(x0 + opt.mover_speed * (t_end + 3.0), lane, 0.9),
           Eigen::Quaterniond::Identity(), t_end + 2.0);
    mover.schedule = {a, b};
    scene.movers.push_back(mover);
  }

  for (int i = 0; i < opt.frames; ++i)
    scene.trajectory.emplace_back(
        Eigen::Vector3d(i * opt.frame_step, 0.0, opt.sensor_height),
        Eigen::Quaterniond::Identity(), i * opt.frame_dt);

  scene.sensor.azimuth_steps = opt.azimuth_steps;
  scene.sensor.max_range = opt.max_range;
  scene.sensor.noise_sigma = opt.noise_sigma;
  for (int b = 0; b < opt.beams; ++b) {
    double a = opt.beam_lo_deg +
               (opt.beam_hi_deg - opt.beam_lo_deg) * b / std::max(1, opt.beams - 1);
    scene.sensor.beam_elevations_deg.push_back(a);
  }

  scene.rig = simple_rig();
  scene.rig.extrinsic.translation = Eigen::Vector3d(0.2, 0.0, -0.3);
  double t0 = scene.trajectory.front().timestamp;
  double t1 = scene.trajectory.back().timestamp;
  for (int c = 0; c < opt.camera_count; ++c) {
    double alpha = (c + 1.0) / (opt.camera_count + 1.0);
    scene.camera_timestamps.push_back(t0 + alpha * (t1 - t0) + 0.013);
  }
  return scene;
}

/// Voting resolution matched to the scene's sensor, the way the parameter
/// guidelines tie the projection image to the sensor resolution: azimuth
/// pixels no finer than the scan step, vertical pixels keeping adjacent
/// beams within the vote window.
inline doc::VotingParams street_voting(const StreetSceneOptions& opt) {
  doc::VotingParams vp;
  double az_step = 2.0 * kPi / opt.azimuth_steps;
  double beam_step =
      deg2rad((opt.beam_hi_deg - opt.beam_lo_deg) / std::max(1, opt.beams - 1));
  vp.dtheta = std::max(deg2rad(0.2), az_step * 1.05);
  vp.dphi = std::max(deg2rad(0.2), beam_step * 0.55);
  return vp;
}

/// Ground segmentation + classification over every frame of a scene, all in
/// memory. truth[i].labels is the simulator's exact per-point answer,
/// predicted[i] is the pipeline's.
struct InMemoryRun {
  std::vector<synth::FrameTruth> truth;
  std::vector<std::shared_ptr<PointCloud>> frames;  // ground labels attached
  std::vector<std::vector<PointLabel>> predicted;
  double voting_seconds = 0.0;  // classify_frame wall time, key images excluded
};

inline InMemoryRun run_ground_and_doc(const synth::SceneScript& scene,
                                      const ground::GroundParams& gp,
                                      const doc::KeyFrameParams& kf,
                                      const doc::VotingParams& vp, int workers = 0) {
  InMemoryRun run;
  Trajectory traj(scene.trajectory);

  std::vector<PointCloud> raw;
  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) {
    run.truth.push_back(
        synth::raycast_frame(scene, scene.trajectory[i].timestamp, scene.trajectory[i], i));
    raw.push_back(run.truth.back().cloud);
  }

  auto ground_flags = ground::segment_ground(raw, traj, gp, workers);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto frame = std::make_shared<PointCloud>(std::move(raw[i]));
    frame->labels.assign(frame->size(), PointLabel::Unlabeled);
    for (std::size_t k = 0; k < frame->size(); ++k)
      if (ground_flags[i][k]) frame->labels[k] = PointLabel::Ground;
    run.frames.push_back(std::move(frame));
  }

  doc::KeyImageCache images([&run](int idx) { return run.frames[idx]; }, vp, 512);
  for (std::size_t i = 0; i < run.frames.size(); ++i) {
    // Warm the key images outside the timed region.
    for (int j : doc::select_key_frames(traj, static_cast<int>(i), kf)) images.get(j);
    auto start = std::chrono::steady_clock::now();
    run.predicted.push_back(doc::classify_frame(*run.frames[i], static_cast<int>(i),
                                                traj, images, kf, vp, workers));
    run.voting_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return run;
}

}  // namespace helpers
