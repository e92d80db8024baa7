#include <doctest.h>

#include <random>

#include "densedepth/render.hpp"
#include "densedepth/synth.hpp"
#include "support/helpers.hpp"

using namespace densedepth;
using render::FrameRef;
using render::RenderParams;

namespace {

/// Fully static wall cloud in the sensor frame: points on the plane
/// x = distance, covering the camera FOV densely.
PointCloud wall_cloud(double distance, double half_span, double step,
                      PointLabel label = PointLabel::Static) {
  PointCloud cloud;
  for (double y = -half_span; y <= half_span; y += step)
    for (double z = -half_span; z <= half_span; z += step) {
      cloud.points.emplace_back(distance, y, z);
      cloud.labels.push_back(label);
    }
  return cloud;
}

Pose identity_pose(double t = 0.0) {
  return Pose(Eigen::Vector3d::Zero(), Eigen::Quaterniond::Identity(), t);
}

}  // namespace

TEST_CASE("frame selection keeps the arc window and thins by d_step") {
  Trajectory traj = helpers::straight_trajectory(200, 1.0);
  RenderParams params;
  params.d_min = 5.0;
  params.d_max = 100.0;
  params.d_step = 0.2;
  auto sel = render::select_render_frames(traj, traj[50].timestamp, params);
  // every frame with arc in (45, 150): spacing 1 m > d_step keeps them all
  std::vector<int> expect;
  for (int k = 46; k <= 149; ++k) expect.push_back(k);
  CHECK(sel.static_frames == expect);
  CHECK(sel.dynamic_frame == 50);
}

TEST_CASE("frame selection with d_step 2 keeps every other frame") {
  Trajectory traj = helpers::straight_trajectory(40, 1.0);
  RenderParams params;
  params.d_min = 100.0;
  params.d_max = 100.0;
  params.d_step = 2.0;
  auto sel = render::select_render_frames(traj, traj[0].timestamp, params);
  for (std::size_t i = 1; i < sel.static_frames.size(); ++i)
    CHECK(sel.static_frames[i] - sel.static_frames[i - 1] == 2);
}

TEST_CASE("closest dynamic frame matches a linear-scan argmin") {
  std::mt19937_64 rng(139);
  std::uniform_real_distribution<double> jitter(0.01, 0.19);
  std::vector<Pose> poses;
  double t = 0.0;
  for (int i = 0; i < 60; ++i) {
    poses.emplace_back(Eigen::Vector3d(i * 0.7, 0, 0), Eigen::Quaterniond::Identity(), t);
    t += jitter(rng);
  }
  Trajectory traj(poses);
  RenderParams params;
  std::uniform_real_distribution<double> pick(traj.t_first(), traj.t_last());
  for (int q = 0; q < 50; ++q) {
    double t_cam = pick(rng);
    auto sel = render::select_render_frames(traj, t_cam, params);
    int best = 0;
    for (std::size_t k = 1; k < traj.size(); ++k)
      if (std::abs(traj[k].timestamp - t_cam) <
          std::abs(traj[best].timestamp - t_cam))
        best = static_cast<int>(k);
    CHECK(sel.dynamic_frame == best);
  }
}

TEST_CASE("empty selection window is an error") {
  Trajectory traj = helpers::straight_trajectory(5, 100.0, 1.0);
  RenderParams params;
  params.d_min = 1.0;
  params.d_max = 1.0;
  CHECK_THROWS_WITH_AS(render::select_render_frames(traj, 2.5, params),
                       "no frames near camera time", Error);
}

TEST_CASE("projection puts an optical-axis point at the principal point") {
  CameraRig rig = helpers::simple_rig(640, 480, 500.0);
  rig.extrinsic = Pose();  // camera frame == lidar frame for this check
  auto px = render::project_point({0, 0, 5}, identity_pose(), identity_pose(), rig);
  REQUIRE(px.has_value());
  CHECK(px->u == doctest::Approx(320.0));
  CHECK(px->v == doctest::Approx(240.0));
  CHECK(px->z == doctest::Approx(5.0));
}

TEST_CASE("projection offsets by f x over z") {
  CameraRig rig = helpers::simple_rig(640, 480, 500.0);
  rig.extrinsic = Pose();
  auto px = render::project_point({1, 0, 5}, identity_pose(), identity_pose(), rig);
  REQUIRE(px.has_value());
  CHECK(px->u == doctest::Approx(420.0));
}

TEST_CASE("points behind the camera report behind") {
  CameraRig rig = helpers::simple_rig();
  rig.extrinsic = Pose();
  CHECK_FALSE(render::project_point({0, 0, -5}, identity_pose(), identity_pose(), rig)
                  .has_value());
}

TEST_CASE("projection chain round-trips against its algebraic inverse") {
  std::mt19937_64 rng(149);
  for (int trial = 0; trial < 100; ++trial) {
    CameraRig rig = helpers::simple_rig(640, 480, 450.0);
    rig.extrinsic = helpers::random_pose(rng, 0.5);
    Pose frame_pose = helpers::random_pose(rng, 10.0);
    Pose cam_pose = helpers::random_pose(rng, 10.0);
    Eigen::Vector3d p_l = helpers::random_vec(rng, 20.0);

    auto px = render::project_point(p_l, frame_pose, cam_pose, rig);
    if (!px) continue;
    // invert: pixel + depth -> camera frame -> world -> frame k
    Eigen::Vector3d p_cam(px->z * (px->u - rig.K(0, 2)) / rig.K(0, 0),
                          px->z * (px->v - rig.K(1, 2)) / rig.K(1, 1), px->z);
    Eigen::Vector3d back =
        frame_pose.inverse().apply(cam_pose.compose(rig.extrinsic).apply(p_cam));
    CHECK((back - p_l).norm() < 1e-9);
  }
}

TEST_CASE("splat size follows the log law") {
  Eigen::Vector3d p = std::exp(1.0) * Eigen::Vector3d::UnitZ();
  CHECK(render::splat_size(p, 1.0, 8.0) == doctest::Approx(4.0));
  CHECK(render::splat_size({0, 0, 500.0}, 1.0, 8.0) == doctest::Approx(1.0));
  CHECK(render::splat_size({0.5, 0, 0}, 1.0, 8.0) == doctest::Approx(8.0));
}

TEST_CASE("a wall fills the image at its analytic depth") {
  CameraRig rig = helpers::simple_rig(320, 240, 260.0);
  rig.extrinsic = helpers::camera_forward_extrinsic();
  PointCloud wall = wall_cloud(10.0, 8.0, 0.05);

  RenderParams params;
  std::vector<FrameRef> frames = {{&wall, identity_pose()}};
  DepthMap map = render::render_depth(frames, {nullptr, Pose()}, identity_pose(), rig,
                                      params);
  CHECK(map.density() > 0.99);
  for (int y = 0; y < map.height(); y += 7)
    for (int x = 0; x < map.width(); x += 11) {
      if (!map.valid(x, y)) continue;
      CHECK(map.at(x, y) == doctest::Approx(10.0).epsilon(1e-6));
    }
}

TEST_CASE("a near box is never shot through to the far wall") {
  CameraRig rig = helpers::simple_rig(320, 240, 260.0);
  PointCloud scene = wall_cloud(10.0, 8.0, 0.05);
  PointCloud box = wall_cloud(5.0, 1.0, 0.02);  // 2x2 m box face at 5 m
  scene.points.insert(scene.points.end(), box.points.begin(), box.points.end());
  scene.labels.insert(scene.labels.end(), box.labels.begin(), box.labels.end());

  RenderParams params;
  std::vector<FrameRef> frames = {{&scene, identity_pose()}};
  DepthMap map = render::render_depth(frames, {nullptr, Pose()}, identity_pose(), rig,
                                      params);

  // pixels strictly inside the box silhouette: |y|,|z| < 1 at depth 5
  // -> |u - cx| < 260/5 * 1 = 52
  for (int y = 120 - 40; y <= 120 + 40; ++y)
    for (int x = 160 - 40; x <= 160 + 40; ++x) {
      REQUIRE(map.valid(x, y));
      CHECK(map.at(x, y) <= 5.0 + 1e-5);
    }
}

TEST_CASE("z-buffer is monotone under added points") {
  CameraRig rig = helpers::simple_rig(160, 120, 130.0);
  PointCloud wall = wall_cloud(12.0, 8.0, 0.1);
  RenderParams params;
  std::vector<FrameRef> frames = {{&wall, identity_pose()}};
  DepthMap base = render::render_depth(frames, {nullptr, Pose()}, identity_pose(), rig,
                                       params);

  PointCloud more = wall;
  PointCloud closer = wall_cloud(7.0, 2.0, 0.1);
  more.points.insert(more.points.end(), closer.points.begin(), closer.points.end());
  more.labels.insert(more.labels.end(), closer.labels.begin(), closer.labels.end());
  std::vector<FrameRef> frames2 = {{&more, identity_pose()}};
  DepthMap grown = render::render_depth(frames2, {nullptr, Pose()}, identity_pose(), rig,
                                        params);
  for (std::size_t i = 0; i < base.data().size(); ++i)
    CHECK(grown.data()[i] <= base.data()[i]);
}

TEST_CASE("frame order does not change the output") {
  std::mt19937_64 rng(151);
  CameraRig rig = helpers::simple_rig(160, 120, 130.0);
  PointCloud a = wall_cloud(9.0, 6.0, 0.15);
  PointCloud b = wall_cloud(14.0, 8.0, 0.2);
  PointCloud c = wall_cloud(6.0, 2.0, 0.1);
  RenderParams params;

  std::vector<FrameRef> order1 = {{&a, identity_pose()}, {&b, identity_pose()}, {&c, identity_pose()}};
  std::vector<FrameRef> order2 = {{&c, identity_pose()}, {&a, identity_pose()}, {&b, identity_pose()}};
  DepthMap m1 = render::render_depth(order1, {nullptr, Pose()}, identity_pose(), rig, params);
  DepthMap m2 = render::render_depth(order2, {nullptr, Pose()}, identity_pose(), rig, params);
  CHECK(m1.data() == m2.data());
}

TEST_CASE("dynamic points come exclusively from the closest frame") {
  CameraRig rig = helpers::simple_rig(160, 120, 130.0);
  PointCloud stat = wall_cloud(15.0, 9.0, 0.15);

  PointCloud closest = wall_cloud(6.0, 0.5, 0.05, PointLabel::Dynamic);
  // poison: a *different* frame carrying dynamic points much nearer
  PointCloud poison = wall_cloud(2.0, 3.0, 0.05, PointLabel::Dynamic);
  PointCloud stat_plus_poison = stat;
  stat_plus_poison.points.insert(stat_plus_poison.points.end(), poison.points.begin(),
                                 poison.points.end());
  stat_plus_poison.labels.insert(stat_plus_poison.labels.end(), poison.labels.begin(),
                                 poison.labels.end());

  RenderParams params;
  std::vector<FrameRef> frames_clean = {{&stat, identity_pose()}};
  std::vector<FrameRef> frames_poisoned = {{&stat_plus_poison, identity_pose()}};
  FrameRef dyn{&closest, identity_pose()};

  DepthMap clean = render::render_depth(frames_clean, dyn, identity_pose(), rig, params);
  DepthMap poisoned =
      render::render_depth(frames_poisoned, dyn, identity_pose(), rig, params);
  CHECK(clean.data() == poisoned.data());
}

TEST_CASE("a mover renders at its camera-time position, not along its trail") {
  helpers::StreetSceneOptions opt;
  opt.frames = 40;
  opt.beams = 28;
  opt.beam_lo_deg = -20;
  opt.beam_hi_deg = 12;
  opt.azimuth_steps = 900;
  opt.movers = 1;
  opt.mover_speed = 2.5;
  auto scene = helpers::street_scene(opt);
  Trajectory traj(scene.trajectory);
  double t_cam = scene.camera_timestamps[1];

  // frames labeled with exact truth stand in for the classifier here
  std::vector<PointCloud> clouds;
  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) {
    auto ft = synth::raycast_frame(scene, scene.trajectory[i].timestamp,
                                   scene.trajectory[i], i);
    ft.cloud.labels = ft.labels;
    clouds.push_back(std::move(ft.cloud));
  }

  RenderParams params;
  auto sel = render::select_render_frames(traj, t_cam, params);
  std::vector<FrameRef> static_frames;
  for (int k : sel.static_frames) static_frames.push_back({&clouds[k], traj[k]});
  FrameRef dyn{&clouds[sel.dynamic_frame], traj[sel.dynamic_frame]};

  Pose cam_pose = traj.interpolate(t_cam);
  DepthMap rendered =
      render::render_depth(static_frames, dyn, cam_pose, scene.rig, params);

  Pose cam_world = cam_pose.compose(scene.rig.extrinsic);
  DepthMap with_mover = synth::analytic_depth(scene, t_cam, cam_world, scene.rig, true);
  DepthMap without = synth::analytic_depth(scene, t_cam, cam_world, scene.rig, false);

  // inside the analytic mover silhouette the rendered depth tracks the mover
  std::size_t silhouette = 0, agree = 0;
  for (int y = 0; y < rendered.height(); ++y)
    for (int x = 0; x < rendered.width(); ++x) {
      if (!with_mover.valid(x, y) || !without.valid(x, y)) continue;
      if (with_mover.at(x, y) < without.at(x, y) - 0.3) {
        ++silhouette;
        if (rendered.valid(x, y) &&
            std::abs(rendered.at(x, y) - with_mover.at(x, y)) < 0.5)
          ++agree;
      }
    }
  REQUIRE(silhouette > 200);
  CHECK(static_cast<double>(agree) / static_cast<double>(silhouette) > 0.85);
}
