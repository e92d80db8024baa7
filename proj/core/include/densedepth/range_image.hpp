#pragma once

#include <vector>

#include "densedepth/common.hpp"
#include "densedepth/geometry.hpp"

namespace densedepth {

/// Spherical-projection grid of minimum ranges. A pixel holds the smallest
/// range of all inserted points mapping there; pixels nobody hit stay at
/// +inf. is_ground tracks the label of the argmin point.
class RangeImage {
public:
  RangeImage(double dphi, double dtheta);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double dphi() const { return dphi_; }
  double dtheta() const { return dtheta_; }

  bool in_bounds(int r, int c) const {
    return r >= 0 && r < rows_ && c >= 0 && c < cols_;
  }
  float range(int r, int c) const { return range_[idx(r, c)]; }
  bool valid(int r, int c) const { return std::isfinite(range_[idx(r, c)]); }
  bool is_ground(int r, int c) const { return ground_[idx(r, c)] != 0; }

  /// Inserts one point. On a range tie the ground flags are OR-ed so the
  /// result does not depend on insertion order.
  void insert(const Eigen::Vector3d& p, PointLabel label);

  const std::vector<float>& data() const { return range_; }
  const std::vector<std::uint8_t>& ground_data() const { return ground_; }

private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  double dphi_, dtheta_;
  int rows_, cols_;
  std::vector<float> range_;
  std::vector<std::uint8_t> ground_;
};

/// Projects a sensor-frame cloud into a fresh range image.
/// An empty cloud yields a valid all-invalid image.
RangeImage build_range_image(const PointCloud& cloud, double dphi, double dtheta);

}  // namespace densedepth
