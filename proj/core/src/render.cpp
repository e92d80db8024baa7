#include "densedepth/render.hpp"

#include <algorithm>
#include <cmath>

namespace densedepth::render {

RenderSelection select_render_frames(const Trajectory& traj, double t_cam,
                                     const RenderParams& params) {
  params.validate();
  const double cam_arc = traj.arc_at_time(t_cam);

  RenderSelection sel;
  double last_kept_arc = 0.0;
  bool have_kept = false;
  double best_dt = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    double d = traj.arc_length(k) - cam_arc;  // signed: later frames positive
    if (d > -params.d_min && d < params.d_max) {
      if (!have_kept || traj.arc_length(k) - last_kept_arc >= params.d_step) {
        sel.static_frames.push_back(static_cast<int>(k));
        last_kept_arc = traj.arc_length(k);
        have_kept = true;
      }
    }
    double dt = std::abs(traj[k].timestamp - t_cam);
    if (dt < best_dt) {
      best_dt = dt;
      sel.dynamic_frame = static_cast<int>(k);
    }
  }
  if (sel.static_frames.empty()) throw Error("no frames near camera time");
  return sel;
}

std::optional<PixelPoint> project_point(const Eigen::Vector3d& p_lidar,
                                        const Pose& frame_pose,
                                        const Pose& cam_time_pose,
                                        const CameraRig& rig) {
  Pose world_to_cam = cam_time_pose.compose(rig.extrinsic).inverse();
  Eigen::Vector3d p_cam = world_to_cam.apply(frame_pose.apply(p_lidar));
  if (p_cam.z() <= 0.0) return std::nullopt;
  Eigen::Vector3d h = rig.K * p_cam;
  return PixelPoint{h.x() / p_cam.z(), h.y() / p_cam.z(), p_cam.z()};
}

double splat_size(const Eigen::Vector3d& p_camera, double sigma_min, double sigma_max) {
  double log_sq = std::log(p_camera.squaredNorm());
  if (log_sq <= 0.0) return sigma_max;
  return std::max(sigma_max / log_sq, sigma_min);
}

namespace {

/// Stamps a flat vertical ellipse. Every covered pixel center takes the
/// splat depth through the min z-buffer; the pixel nearest the projection
/// is always written so isolated points never vanish.
void splat(DepthMap& buffer, const PixelPoint& px, double sigma, double elongation) {
  const double a = std::max(sigma * 0.5, 1e-6);           // half width
  const double b = std::max(sigma * elongation * 0.5, 1e-6);  // half height
  const float depth = static_cast<float>(px.z);

  int cx = static_cast<int>(std::floor(px.u));
  int cy = static_cast<int>(std::floor(px.v));
  if (cx >= 0 && cx < buffer.width() && cy >= 0 && cy < buffer.height())
    buffer.fuse_min(cx, cy, depth);

  int x0 = std::max(0, static_cast<int>(std::floor(px.u - a - 0.5)));
  int x1 = std::min(buffer.width() - 1, static_cast<int>(std::ceil(px.u + a - 0.5)));
  int y0 = std::max(0, static_cast<int>(std::floor(px.v - b - 0.5)));
  int y1 = std::min(buffer.height() - 1, static_cast<int>(std::ceil(px.v + b - 0.5)));
  for (int y = y0; y <= y1; ++y) {
    double dy = (y + 0.5 - px.v) / b;
    double rem = 1.0 - dy * dy;
    if (rem < 0.0) continue;
    // Solve the ellipse for this row instead of testing every pixel.
    double half_span = a * std::sqrt(rem);
    int sx0 = std::max(x0, static_cast<int>(std::ceil(px.u - half_span - 0.5)));
    int sx1 = std::min(x1, static_cast<int>(std::floor(px.u + half_span - 0.5)));
    for (int x = sx0; x <= sx1; ++x) buffer.fuse_min(x, y, depth);
  }
}

void splat_frame(DepthMap& buffer, const FrameRef& frame, const Pose& world_to_cam,
                 const CameraRig& rig, const RenderParams& params, bool dynamic_pass) {
  const PointCloud& cloud = *frame.cloud;
  const double crop_sq = params.d_crop * params.d_crop;
  const double sig_min = dynamic_pass ? params.sigma_min_dyn : params.sigma_min;
  const double sig_max = dynamic_pass ? params.sigma_max_dyn : params.sigma_max;
  const Eigen::Matrix3d rot =
      (world_to_cam.rotation * frame.pose.rotation).toRotationMatrix();
  const Eigen::Vector3d trans =
      world_to_cam.rotation * frame.pose.translation + world_to_cam.translation;

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    PointLabel label = cloud.label(i);
    if (dynamic_pass) {
      if (label != PointLabel::Dynamic) continue;
    } else {
      if (label != PointLabel::Static && label != PointLabel::Ground) continue;
    }
    const Eigen::Vector3d& p = cloud.points[i];
    if (p.squaredNorm() >= crop_sq) continue;

    Eigen::Vector3d p_cam = rot * p + trans;
    if (p_cam.z() <= 0.0) continue;
    Eigen::Vector3d h = rig.K * p_cam;
    PixelPoint px{h.x() / p_cam.z(), h.y() / p_cam.z(), p_cam.z()};
    double sigma = splat_size(p_cam, sig_min, sig_max);
    double half_w = sigma * 0.5;
    double half_h = half_w * params.elongation;
    if (px.u + half_w < -0.5 || px.u - half_w > buffer.width() + 0.5 ||
        px.v + half_h < -0.5 || px.v - half_h > buffer.height() + 0.5)
      continue;
    splat(buffer, px, sigma, params.elongation);
  }
}

}  // namespace

DepthMap render_depth(const std::vector<FrameRef>& static_frames,
                      const FrameRef& dynamic_frame, const Pose& cam_time_pose,
                      const CameraRig& rig, const RenderParams& params) {
  params.validate();
  rig.validate();

  DepthMap buffer(rig.width, rig.height);
  Pose world_to_cam = cam_time_pose.compose(rig.extrinsic).inverse();

  for (const FrameRef& frame : static_frames) {
    if (!frame.cloud) throw Error("render frame missing cloud");
    splat_frame(buffer, frame, world_to_cam, rig, params, false);
  }
  if (dynamic_frame.cloud)
    splat_frame(buffer, dynamic_frame, world_to_cam, rig, params, true);
  return buffer;
}

}  // namespace densedepth::render
