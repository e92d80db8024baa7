#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "densedepth/common.hpp"

namespace densedepth {

/// Exact k-d tree over 3D points. Queries return indices into the input
/// array, sorted by (distance, index); ties are broken toward the lower
/// index so results match a linear scan exactly.
class KdTree {
public:
  explicit KdTree(std::span<const Eigen::Vector3d> points);

  /// k nearest neighbors; k larger than the cloud returns all points.
  std::vector<int> knn(const Eigen::Vector3d& query, int k) const;

  /// All points with |p - query| <= r.
  std::vector<int> radius(const Eigen::Vector3d& query, double r) const;

  std::size_t size() const { return points_.size(); }

private:
  struct Node {
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;       // leaf payload range in order_
    int axis = 0;
    double split = 0;  // split coordinate for inner nodes
  };

  int build(int begin, int end);

  std::span<const Eigen::Vector3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 16;
};

/// Voxel-grid downsample keeping one real point per occupied voxel (the
/// point nearest that voxel's point centroid) plus a map from every input
/// point to its representative, so labels computed on the reduced cloud can
/// be reprojected onto the full one.
struct DownsampleResult {
  PointCloud cloud;
  std::vector<int> representative;  // input index -> index into cloud
  std::vector<int> source_index;    // cloud index -> input index of the kept point
};

DownsampleResult voxel_downsample(const PointCloud& cloud, double voxel_size);

}  // namespace densedepth
