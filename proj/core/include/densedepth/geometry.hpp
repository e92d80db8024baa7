#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <vector>

#include "densedepth/common.hpp"

namespace densedepth {

/// Rigid transform (translation + unit quaternion), optionally timestamped.
/// Applying a pose maps body-frame coordinates into the parent frame.
struct Pose {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  double timestamp = 0.0;

  Pose() = default;
  Pose(const Eigen::Vector3d& u, const Eigen::Quaterniond& q, double t = 0.0)
      : translation(u), rotation(q.normalized()), timestamp(t) {}

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  Pose compose(const Pose& other) const {
    Pose out;
    out.rotation = (rotation * other.rotation).normalized();
    out.translation = rotation * other.translation + translation;
    out.timestamp = other.timestamp;
    return out;
  }

  Pose inverse() const {
    Pose out;
    out.rotation = rotation.conjugate();
    out.translation = -(out.rotation * translation);
    out.timestamp = timestamp;
    return out;
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation.toRotationMatrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

/// Geodesic distance between two unit quaternions, radians in [0, pi].
double quat_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Sign-insensitive coefficient distance min(|a-b|, |a+b|); resolves far
/// below what the acos form can near identity.
double quat_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Shortest-arc slerp; the sign of b is fixed so the interpolation path is
/// the short one.
Eigen::Quaterniond slerp_shortest(const Eigen::Quaterniond& a,
                                  const Eigen::Quaterniond& b, double alpha);

/// Timestamped pose sequence with precomputed cumulative arc length.
/// Timestamps must be strictly increasing.
class Trajectory {
public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Pose> poses);

  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }
  const Pose& operator[](std::size_t i) const { return poses_[i]; }
  const std::vector<Pose>& poses() const { return poses_; }

  /// Cumulative curvilinear arc length at pose i, meters; arc_length(0) == 0.
  double arc_length(std::size_t i) const { return arc_length_[i]; }

  /// Signed curvilinear distance from pose i to pose j (positive when j is
  /// later along the trajectory).
  double signed_distance(std::size_t i, std::size_t j) const {
    return arc_length_[j] - arc_length_[i];
  }

  double t_first() const { return poses_.front().timestamp; }
  double t_last() const { return poses_.back().timestamp; }

  /// Index i of the segment [t_i, t_{i+1}] bracketing t.
  /// Throws "extrapolation requested" when t is outside the span.
  std::size_t bracket(double t) const;

  /// Pose at time t: linear translation, shortest-arc slerp orientation.
  Pose interpolate(double t) const;

  /// Arc-length coordinate at time t (linear within the bracketing segment).
  double arc_at_time(double t) const;

private:
  std::vector<Pose> poses_;
  std::vector<double> arc_length_;
};

/// Angular cell of the spherical projection plus the measured range.
struct SphericalPixel {
  int row = 0;
  int col = 0;
  double rho = 0.0;
};

/// Maps a nonzero point to its spherical-projection cell:
///   phi = |acos(z/|p|)| in [0, pi], theta = -atan2(y, x) in (-pi, pi],
///   row = floor(phi/dphi) clamped, col = floor((theta+pi)/dtheta) mod cols.
/// Throws "degenerate point" on zero-norm input.
SphericalPixel spherical_project(const Eigen::Vector3d& p, double dphi, double dtheta);

inline int spherical_rows(double dphi) { return static_cast<int>(std::ceil(kPi / dphi)); }
inline int spherical_cols(double dtheta) { return static_cast<int>(std::ceil(2.0 * kPi / dtheta)); }

}  // namespace densedepth
