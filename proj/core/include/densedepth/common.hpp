#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace densedepth {

/// Error type thrown by every component. The message is the contract:
/// callers match on it, the CLI maps it to a nonzero exit code.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class PointLabel : std::uint8_t {
  Unlabeled = 0,
  Ground = 1,
  Static = 2,
  Dynamic = 3,
};

/// Point cloud with optional per-point labels. Positions are meters in the
/// frame named by frame_id ("sensor" or "world").
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<PointLabel> labels;  // empty, or one entry per point
  std::string frame_id = "sensor";
  double timestamp = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_labels() const { return !labels.empty(); }

  PointLabel label(std::size_t i) const {
    return labels.empty() ? PointLabel::Unlabeled : labels[i];
  }
};

struct Aabb {
  Eigen::Vector3d min = Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity());
  Eigen::Vector3d max = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());

  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

inline constexpr float kInvalidDepth = std::numeric_limits<float>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace densedepth
