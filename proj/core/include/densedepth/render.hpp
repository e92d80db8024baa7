#pragma once

#include <optional>
#include <vector>

#include "densedepth/camera.hpp"
#include "densedepth/common.hpp"
#include "densedepth/geometry.hpp"

namespace densedepth::render {

struct RenderParams {
  double d_min = 5.0;    // arc distance kept behind the camera, meters
  double d_max = 120.0;  // forward arc window, meters
  double d_step = 0.2;   // minimum arc spacing between used frames, meters
  double d_crop = 60.0;  // per-frame point range crop, meters
  double sigma_min = 1.0;
  double sigma_max = 9.0;
  double sigma_min_dyn = 2.0;
  double sigma_max_dyn = 16.0;
  double elongation = 2.0;  // vertical ellipse height / width

  void validate() const {
    if (d_min <= 0 || d_max <= 0 || d_step <= 0 || d_crop <= 0 ||
        sigma_min <= 0 || sigma_max < sigma_min || sigma_min_dyn <= 0 ||
        sigma_max_dyn < sigma_min_dyn || elongation <= 0)
      throw Error("invalid render parameters");
  }
};

struct RenderSelection {
  std::vector<int> static_frames;  // arc-windowed, thinned by d_step
  int dynamic_frame = -1;          // temporally closest frame to t_cam
};

/// Frames whose signed arc distance from the camera position lies in
/// (-d_min, d_max), greedily thinned to a minimum spacing of d_step, plus
/// the temporally closest frame for dynamic points.
/// Throws "no frames near camera time" when the window is empty.
RenderSelection select_render_frames(const Trajectory& traj, double t_cam,
                                     const RenderParams& params);

struct PixelPoint {
  double u = 0, v = 0, z = 0;
};

/// Chains frame pose, interpolated camera-time pose and the rig extrinsic,
/// then applies the pinhole model. Empty when the point lands behind the
/// camera (z <= 0).
std::optional<PixelPoint> project_point(const Eigen::Vector3d& p_lidar,
                                        const Pose& frame_pose, const Pose& cam_time_pose,
                                        const CameraRig& rig);

/// Screen-space splat width in pixels: max(sigma_max / log(|p|^2), sigma_min),
/// natural log; |p|^2 <= 1 degenerates to sigma_max (nearest points get the
/// largest splat).
double splat_size(const Eigen::Vector3d& p_camera, double sigma_min, double sigma_max);

struct FrameRef {
  const PointCloud* cloud = nullptr;  // carries {Ground, Static, Dynamic} labels
  Pose pose;
};

/// Composite rendering: static + ground points of every selected frame and
/// dynamic points of the single closest frame, splatted as vertical
/// ellipses through a shared min z-buffer.
DepthMap render_depth(const std::vector<FrameRef>& static_frames,
                      const FrameRef& dynamic_frame, const Pose& cam_time_pose,
                      const CameraRig& rig, const RenderParams& params);

}  // namespace densedepth::render
