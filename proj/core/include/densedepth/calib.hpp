#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "densedepth/camera.hpp"
#include "densedepth/common.hpp"

namespace densedepth::calib {

/// Plane x . n - d = 0 with |n| = 1. Camera-side planes additionally carry
/// an on-plane origin point p.
struct Plane {
  Eigen::Vector3d n = Eigen::Vector3d::UnitZ();
  double d = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  bool has_origin = false;

  double signed_distance(const Eigen::Vector3d& x) const { return x.dot(n) - d; }

  /// Flips the normal so it points into the half-space containing the
  /// sensor origin (d <= 0 under the x.n - d = 0 convention).
  void orient_toward_origin() {
    if (d > 0.0) {
      n = -n;
      d = -d;
    }
  }
};

struct PlaneFit {
  Plane plane;
  std::vector<int> inliers;
};

struct RansacOptions {
  int iterations = 500;
  double inlier_tolerance = 0.02;  // meters, roughly sensor noise
  std::uint64_t seed = 1;
  std::optional<Aabb> crop;  // box around the expected target
};

/// RANSAC plane fit, least-squares (PCA) refit on the winning inliers, and
/// normal orientation toward the sensor origin. Throws "degenerate plane
/// input" on fewer than 3 usable points or an all-collinear cloud.
PlaneFit ransac_plane(const PointCloud& cloud, const RansacOptions& options);

/// Rotation R minimizing sum |n_l - R n_c|^2 over unit-normal pairs via the
/// cross-covariance SVD, det(R) = +1 enforced. Throws "rotation
/// unobservable" when the normals are all parallel.
Eigen::Matrix3d solve_rotation(
    const std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>& camera_to_lidar_normals);

/// Translation u minimizing sum |n_l . (R p_c + u) - d_l|^2. Throws
/// "translation unobservable" when the LiDAR normals do not span 3D.
Eigen::Vector3d solve_translation(
    const std::vector<std::pair<Plane, Plane>>& camera_lidar_pairs,
    const Eigen::Matrix3d& rotation);

struct CalibrationView {
  Plane camera_plane;  // must carry the plane origin p
  PointCloud cloud;    // LiDAR frame containing the target
  std::optional<Aabb> crop;
};

struct ViewResidual {
  int view = 0;
  double normal_angle_deg = 0.0;
  double offset_m = 0.0;
};

struct CalibrationResult {
  Pose extrinsic;  // camera -> LiDAR
  std::vector<ViewResidual> residuals;
  std::vector<int> skipped_views;
};

/// Full extrinsic recovery from matched plane views: RANSAC per cloud,
/// pairing by acquisition index, rotation then translation. Views whose
/// plane extraction fails are skipped with a note in the result.
CalibrationResult calibrate(const std::vector<CalibrationView>& views,
                            const RansacOptions& options = {});

}  // namespace densedepth::calib
