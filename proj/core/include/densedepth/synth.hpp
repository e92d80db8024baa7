#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "densedepth/camera.hpp"
#include "densedepth/common.hpp"
#include "densedepth/geometry.hpp"
#include "densedepth/io.hpp"

namespace densedepth::synth {

/// Finite (or infinite) rectangle on the plane x . n - d = 0. The rectangle
/// spans ext1/ext2 along deterministic in-plane axes around `origin`.
struct PlanePrimitive {
  Eigen::Vector3d n = Eigen::Vector3d::UnitZ();
  double d = 0.0;
  std::optional<Eigen::Vector3d> origin;  // defaults to d * n
  double ext1 = -1.0;                     // half extents; <= 0 means infinite
  double ext2 = -1.0;
  bool is_ground = false;

  Eigen::Vector3d effective_origin() const { return origin ? *origin : d * n; }
  void in_plane_axes(Eigen::Vector3d& e1, Eigen::Vector3d& e2) const;
};

struct BoxPrimitive {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half = Eigen::Vector3d::Ones();
};

/// Box with a piecewise-linear pose schedule (translation lerp, rotation
/// slerp). The schedule must cover the sequence time span.
struct Mover {
  BoxPrimitive box;  // local frame, centered at the schedule pose
  std::vector<Pose> schedule;

  Pose pose_at(double t) const;
};

struct SensorSpec {
  std::vector<double> beam_elevations_deg;  // sorted ascending
  int azimuth_steps = 360;
  double max_range = 120.0;
  double noise_sigma = 0.0;  // range-only Gaussian noise
};

struct HitInfo {
  double t = 0.0;  // ray parameter (range for unit directions)
  PointLabel label = PointLabel::Static;
};

struct SceneScript {
  std::vector<PlanePrimitive> planes;
  std::vector<BoxPrimitive> boxes;
  std::vector<Mover> movers;
  SensorSpec sensor;
  std::vector<Pose> trajectory;       // LiDAR poses, one frame per pose
  CameraRig rig;                      // camera intrinsics + extrinsic
  std::vector<double> camera_timestamps;
  std::uint64_t seed = 1;
};

/// Closest primitive hit along origin + t * dir for t in (1e-9, max_range];
/// movers are posed at scene time. Empty when nothing is hit.
std::optional<HitInfo> raycast(const SceneScript& scene, double time,
                               const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& dir, double max_range,
                               bool include_movers = true);

struct FrameTruth {
  PointCloud cloud;                 // sensor frame
  std::vector<PointLabel> labels;   // exact per-point truth
};

/// One spinning-scan frame: a ray per (beam, azimuth step), closest hit
/// within range, optional along-ray noise. Deterministic per (seed, frame).
FrameTruth raycast_frame(const SceneScript& scene, double time,
                         const Pose& sensor_pose, std::uint64_t frame_index);

/// Exact per-pixel depth through the rig intrinsics; the reference the
/// renderer is judged against. `include_movers` off renders the static set
/// only (useful for silhouette extraction).
DepthMap analytic_depth(const SceneScript& scene, double time,
                        const Pose& camera_pose_world, const CameraRig& rig,
                        bool include_movers = true);

/// Frame timestamps implied by the trajectory poses.
std::vector<double> frame_times(const SceneScript& scene);

/// Writes clouds, poses, truth labels, camera timestamps, rig and analytic
/// depth maps under out_dir and returns the manifest (also saved as
/// manifest.json).
io::SequenceManifest generate_sequence(const SceneScript& scene,
                                       const std::filesystem::path& out_dir,
                                       bool write_analytic_depth = true);

SceneScript load_scene_script(const std::filesystem::path& path);
void save_scene_script(const std::filesystem::path& path, const SceneScript& scene);

}  // namespace densedepth::synth
