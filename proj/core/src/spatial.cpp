#include "densedepth/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <unordered_map>

namespace densedepth {

namespace {

struct Candidate {
  double d2;
  int index;
  bool operator<(const Candidate& o) const {
    return d2 != o.d2 ? d2 < o.d2 : index < o.index;
  }
};

}  // namespace

KdTree::KdTree(std::span<const Eigen::Vector3d> points) : points_(points) {
  if (points_.empty()) throw Error("spatial index over empty cloud");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  root_ = build(0, static_cast<int>(points_.size()));
}

int KdTree::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = points_[order_[begin]];
  Eigen::Vector3d hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  double split = points_[order_[mid]][axis];

  nodes_[id].axis = axis;
  nodes_[id].split = split;
  int left = build(begin, mid);
  int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<int> KdTree::knn(const Eigen::Vector3d& query, int k) const {
  if (k <= 0) return {};
  k = std::min<int>(k, static_cast<int>(points_.size()));
  std::priority_queue<Candidate> heap;  // worst candidate on top

  auto consider = [&](int idx) {
    Candidate c{(points_[idx] - query).squaredNorm(), idx};
    if (static_cast<int>(heap.size()) < k) {
      heap.push(c);
    } else if (c < heap.top()) {
      heap.pop();
      heap.push(c);
    }
  };

  // Recursive descent; nearer child first, prune on the split plane.
  auto visit = [&](auto&& self, int node_id) -> void {
    const Node& node = nodes_[node_id];
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) consider(order_[i]);
      return;
    }
    double delta = query[node.axis] - node.split;
    int near = delta < 0.0 ? node.left : node.right;
    int far = delta < 0.0 ? node.right : node.left;
    self(self, near);
    if (static_cast<int>(heap.size()) < k || delta * delta <= heap.top().d2)
      self(self, far);
  };
  visit(visit, root_);

  std::vector<Candidate> sorted;
  sorted.reserve(heap.size());
  while (!heap.empty()) {
    sorted.push_back(heap.top());
    heap.pop();
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> out;
  out.reserve(sorted.size());
  for (const auto& c : sorted) out.push_back(c.index);
  return out;
}

std::vector<int> KdTree::radius(const Eigen::Vector3d& query, double r) const {
  double r2 = r * r;
  std::vector<Candidate> found;

  auto visit = [&](auto&& self, int node_id) -> void {
    const Node& node = nodes_[node_id];
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        int idx = order_[i];
        double d2 = (points_[idx] - query).squaredNorm();
        if (d2 <= r2) found.push_back({d2, idx});
      }
      return;
    }
    double delta = query[node.axis] - node.split;
    int near = delta < 0.0 ? node.left : node.right;
    int far = delta < 0.0 ? node.right : node.left;
    self(self, near);
    if (delta * delta <= r2) self(self, far);
  };
  visit(visit, root_);

  std::sort(found.begin(), found.end());
  std::vector<int> out;
  out.reserve(found.size());
  for (const auto& c : found) out.push_back(c.index);
  return out;
}

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

VoxelKey voxel_of(const Eigen::Vector3d& p, double s) {
  return {static_cast<std::int64_t>(std::floor(p.x() / s)),
          static_cast<std::int64_t>(std::floor(p.y() / s)),
          static_cast<std::int64_t>(std::floor(p.z() / s))};
}

}  // namespace

DownsampleResult voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (voxel_size <= 0.0) throw Error("voxel size must be positive");

  struct Bucket {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    std::vector<int> members;
  };
  // Voxel output order = first-touch order, so the result is deterministic.
  std::unordered_map<VoxelKey, int, VoxelHash> slots;
  std::vector<Bucket> buckets;
  slots.reserve(cloud.size());

  std::vector<int> bucket_of(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    VoxelKey key = voxel_of(cloud.points[i], voxel_size);
    auto [it, inserted] = slots.try_emplace(key, static_cast<int>(buckets.size()));
    if (inserted) buckets.emplace_back();
    Bucket& b = buckets[it->second];
    b.sum += cloud.points[i];
    b.members.push_back(static_cast<int>(i));
    bucket_of[i] = it->second;
  }

  DownsampleResult out;
  out.cloud.frame_id = cloud.frame_id;
  out.cloud.timestamp = cloud.timestamp;
  out.cloud.points.reserve(buckets.size());
  out.source_index.reserve(buckets.size());
  if (cloud.has_labels()) out.cloud.labels.reserve(buckets.size());

  for (const Bucket& b : buckets) {
    Eigen::Vector3d centroid = b.sum / static_cast<double>(b.members.size());
    int best = b.members.front();
    double best_d2 = (cloud.points[best] - centroid).squaredNorm();
    for (std::size_t m = 1; m < b.members.size(); ++m) {
      int idx = b.members[m];
      double d2 = (cloud.points[idx] - centroid).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = idx;
      }
    }
    out.source_index.push_back(best);
    out.cloud.points.push_back(cloud.points[best]);
    if (cloud.has_labels()) out.cloud.labels.push_back(cloud.labels[best]);
  }

  out.representative.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) out.representative[i] = bucket_of[i];
  return out;
}

}  // namespace densedepth
