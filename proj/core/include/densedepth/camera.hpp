#pragma once

#include <Eigen/Core>

#include <cmath>
#include <vector>

#include "densedepth/common.hpp"
#include "densedepth/geometry.hpp"

namespace densedepth {

/// Camera description: rectified intrinsics, stored distortion (applied
/// upstream), and the camera-to-LiDAR extrinsic.
struct CameraRig {
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  std::vector<double> distortion;
  Pose extrinsic;  // C^{c->l}: camera coordinates -> LiDAR coordinates
  int width = 0;
  int height = 0;

  void validate() const {
    if (width <= 0 || height <= 0) throw Error("invalid image size");
    if (K(0, 0) <= 0 || K(1, 1) <= 0) throw Error("focal lengths must be positive");
    if (std::abs(K(1, 0)) > 1e-12 || std::abs(K(2, 0)) > 1e-12 ||
        std::abs(K(2, 1)) > 1e-12)
      throw Error("intrinsic matrix must be upper triangular");
  }
};

/// Per-pixel metric depth; +inf marks pixels with no measurement.
class DepthMap {
public:
  DepthMap() = default;
  DepthMap(int width, int height)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, kInvalidDepth) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return data_.size(); }

  float at(int x, int y) const { return data_[idx(x, y)]; }
  float& at(int x, int y) { return data_[idx(x, y)]; }
  bool valid(int x, int y) const { return std::isfinite(at(x, y)); }

  /// Keeps the nearer of the stored and offered depth.
  void fuse_min(int x, int y, float depth) {
    float& d = data_[idx(x, y)];
    if (depth < d) d = depth;
  }

  double density() const {
    if (data_.empty()) return 0.0;
    std::size_t n = 0;
    for (float d : data_) n += std::isfinite(d) ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(data_.size());
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

private:
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

}  // namespace densedepth
