#include "densedepth/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace densedepth {

double quat_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  double d = std::min(1.0, std::abs(a.dot(b)));
  return 2.0 * std::acos(d);
}

double quat_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return std::min((a.coeffs() - b.coeffs()).norm(), (a.coeffs() + b.coeffs()).norm());
}

Eigen::Quaterniond slerp_shortest(const Eigen::Quaterniond& a,
                                  const Eigen::Quaterniond& b, double alpha) {
  Eigen::Quaterniond bb = b;
  if (a.dot(b) < 0.0) bb.coeffs() = -bb.coeffs();
  // q(t) = a (a^{-1} bb)^alpha, evaluated through the relative rotation's
  // axis-angle form.
  Eigen::Quaterniond rel = a.conjugate() * bb;
  rel.normalize();
  double w = std::clamp(rel.w(), -1.0, 1.0);
  double half = std::acos(w);
  if (half < 1e-15) return a.normalized();
  Eigen::Vector3d axis = rel.vec() / std::sin(half);
  double scaled = half * alpha;
  Eigen::Quaterniond powed(std::cos(scaled), 0, 0, 0);
  powed.vec() = axis * std::sin(scaled);
  return (a * powed).normalized();
}

Trajectory::Trajectory(std::vector<Pose> poses) : poses_(std::move(poses)) {
  if (poses_.empty()) throw Error("empty trajectory");
  arc_length_.resize(poses_.size());
  arc_length_[0] = 0.0;
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    if (!(poses_[i].timestamp > poses_[i - 1].timestamp))
      throw Error("trajectory timestamps must be strictly increasing");
    arc_length_[i] = arc_length_[i - 1] +
                     (poses_[i].translation - poses_[i - 1].translation).norm();
  }
}

std::size_t Trajectory::bracket(double t) const {
  if (t < t_first() || t > t_last()) throw Error("extrapolation requested");
  if (poses_.size() == 1) return 0;
  auto it = std::upper_bound(poses_.begin(), poses_.end(), t,
                             [](double v, const Pose& p) { return v < p.timestamp; });
  std::size_t hi = static_cast<std::size_t>(it - poses_.begin());
  if (hi == 0) return 0;
  if (hi >= poses_.size()) hi = poses_.size() - 1;
  return hi - 1;
}

Pose Trajectory::interpolate(double t) const {
  std::size_t i = bracket(t);
  if (poses_.size() == 1) return poses_[0];
  std::size_t j = std::min(i + 1, poses_.size() - 1);
  const Pose& a = poses_[i];
  const Pose& b = poses_[j];
  double dt = b.timestamp - a.timestamp;
  double alpha = dt > 0.0 ? (t - a.timestamp) / dt : 0.0;
  Pose out;
  out.translation = a.translation + alpha * (b.translation - a.translation);
  out.rotation = slerp_shortest(a.rotation, b.rotation, alpha);
  out.timestamp = t;
  return out;
}

double Trajectory::arc_at_time(double t) const {
  std::size_t i = bracket(t);
  if (poses_.size() == 1) return 0.0;
  std::size_t j = std::min(i + 1, poses_.size() - 1);
  double dt = poses_[j].timestamp - poses_[i].timestamp;
  double alpha = dt > 0.0 ? (t - poses_[i].timestamp) / dt : 0.0;
  return arc_length_[i] + alpha * (arc_length_[j] - arc_length_[i]);
}

SphericalPixel spherical_project(const Eigen::Vector3d& p, double dphi, double dtheta) {
  double rho = p.norm();
  if (rho <= 0.0) throw Error("degenerate point");
  double phi = std::abs(std::acos(std::clamp(p.z() / rho, -1.0, 1.0)));
  double theta = -std::atan2(p.y(), p.x());

  const int rows = spherical_rows(dphi);
  const int cols = spherical_cols(dtheta);
  int row = static_cast<int>(std::floor(phi / dphi));
  row = std::clamp(row, 0, rows - 1);
  int col = static_cast<int>(std::floor((theta + kPi) / dtheta)) % cols;
  if (col < 0) col += cols;
  return {row, col, rho};
}

}  // namespace densedepth
