#include "densedepth/ground.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <deque>

#include "densedepth/parallel.hpp"
#include "densedepth/spatial.hpp"

namespace densedepth::ground {

std::vector<std::pair<int, int>> chunk_trajectory(const Trajectory& traj, double l) {
  if (l <= 0) throw Error("chunk length must be positive");
  std::vector<std::pair<int, int>> chunks;
  int n = static_cast<int>(traj.size());
  int begin = 0;
  for (int i = 1; i < n; ++i) {
    if (traj.arc_length(i) - traj.arc_length(begin) > l) {
      chunks.emplace_back(begin, i);
      begin = i;
    }
  }
  chunks.emplace_back(begin, n);
  return chunks;
}

std::vector<int> find_seeds(const PointCloud& merged_world,
                            std::span<const Pose> chunk_poses, double r_seed,
                            int k_nn) {
  if (merged_world.empty()) throw Error("no ground seeds");

  // Horizontal disc queries through a z-flattened copy of the cloud.
  std::vector<Eigen::Vector3d> flat(merged_world.size());
  for (std::size_t i = 0; i < merged_world.size(); ++i) {
    flat[i] = Eigen::Vector3d(merged_world.points[i].x(), merged_world.points[i].y(), 0.0);
  }
  KdTree flat_tree(flat);
  KdTree full_tree(merged_world.points);

  const int min_support = std::max(1, k_nn / 2);
  std::vector<int> seeds;
  std::vector<std::uint8_t> taken(merged_world.size(), 0);

  for (const Pose& pose : chunk_poses) {
    Eigen::Vector3d q(pose.translation.x(), pose.translation.y(), 0.0);
    std::vector<int> disc = flat_tree.radius(q, r_seed);
    if (disc.empty()) continue;
    std::sort(disc.begin(), disc.end(), [&](int a, int b) {
      double za = merged_world.points[a].z(), zb = merged_world.points[b].z();
      return za != zb ? za < zb : a < b;
    });
    // Lowest z wins, but isolated low outliers would poison the growth, so
    // a seed needs some local support.
    constexpr int kMaxAttempts = 8;
    int attempts = 0;
    for (int idx : disc) {
      if (++attempts > kMaxAttempts) break;
      std::vector<int> support = full_tree.radius(merged_world.points[idx], 0.5);
      if (static_cast<int>(support.size()) >= min_support) {
        if (!taken[idx]) {
          taken[idx] = 1;
          seeds.push_back(idx);
        }
        break;
      }
    }
  }
  if (seeds.empty()) throw Error("no ground seeds");
  return seeds;
}

Normals estimate_normals(const PointCloud& cloud, int k_nn, int workers) {
  if (static_cast<int>(cloud.size()) < k_nn)
    throw Error("cloud smaller than neighbor count");
  KdTree tree(cloud.points);

  Normals out;
  out.n.assign(cloud.size(), Eigen::Vector3d::UnitZ());
  out.valid.assign(cloud.size(), 0);

  parallel_for(cloud.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::vector<int> nn = tree.knn(cloud.points[i], k_nn);
      Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
      for (int j : nn) centroid += cloud.points[j];
      centroid /= static_cast<double>(nn.size());
      Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
      for (int j : nn) {
        Eigen::Vector3d d = cloud.points[j] - centroid;
        cov += d * d.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
      double mid = eig.eigenvalues()[1];
      double big = eig.eigenvalues()[2];
      if (big <= 0.0 || mid <= 1e-9 * big) continue;  // rank < 2
      Eigen::Vector3d n = eig.eigenvectors().col(0);
      if (n.z() < 0.0) n = -n;
      out.n[i] = n.normalized();
      out.valid[i] = 1;
    }
  });
  return out;
}

std::vector<std::uint8_t> grow_ground(const PointCloud& merged,
                                      const std::vector<int>& seeds,
                                      const Normals& normals,
                                      const GroundParams& params) {
  params.validate();
  KdTree tree(merged.points);
  const double cos_alpha = std::cos(deg2rad(params.alpha_deg));

  std::vector<std::uint8_t> is_ground(merged.size(), 0);
  std::deque<int> frontier;
  for (int s : seeds) {
    if (!normals.valid[s] || normals.n[s].z() < cos_alpha) continue;
    if (!is_ground[s]) {
      is_ground[s] = 1;
      frontier.push_back(s);
    }
  }

  while (!frontier.empty()) {
    int i = frontier.front();
    frontier.pop_front();
    const Eigen::Vector3d& p_i = merged.points[i];
    const Eigen::Vector3d& n_i = normals.n[i];
    for (int j : tree.knn(p_i, params.k_nn)) {
      if (is_ground[j] || !normals.valid[j]) continue;
      if (normals.n[j].z() < cos_alpha) continue;
      if (std::abs((merged.points[j] - p_i).dot(n_i)) > params.delta) continue;
      is_ground[j] = 1;
      frontier.push_back(j);
    }
  }
  return is_ground;
}

std::vector<std::vector<std::uint8_t>> segment_ground_chunk(
    std::span<const PointCloud> frames, std::span<const Pose> poses,
    const GroundParams& params, int workers) {
  params.validate();
  if (frames.size() != poses.size())
    throw Error("frame count does not match pose count");

  std::vector<std::vector<std::uint8_t>> out(frames.size());
  PointCloud merged;
  merged.frame_id = "world";
  std::size_t total = 0;
  for (const PointCloud& f : frames) total += f.size();
  merged.points.reserve(total);

  std::vector<std::pair<int, int>> origin;  // merged index -> (frame, point)
  origin.reserve(total);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    out[f].assign(frames[f].size(), 0);
    for (std::size_t k = 0; k < frames[f].size(); ++k) {
      merged.points.push_back(poses[f].apply(frames[f].points[k]));
      origin.emplace_back(static_cast<int>(f), static_cast<int>(k));
    }
  }
  if (merged.empty()) return out;

  DownsampleResult down = voxel_downsample(merged, params.s);
  if (static_cast<int>(down.cloud.size()) < params.k_nn) throw Error("no ground seeds");

  std::vector<int> seeds = find_seeds(down.cloud, poses, params.r_seed, params.k_nn);
  Normals normals = estimate_normals(down.cloud, params.k_nn, workers);
  std::vector<std::uint8_t> ground = grow_ground(down.cloud, seeds, normals, params);

  // Reproject through the downsample back-reference onto the full cloud.
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (ground[down.representative[i]]) {
      auto [f, k] = origin[i];
      out[f][k] = 1;
    }
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> segment_ground(
    const std::vector<PointCloud>& frames, const Trajectory& traj,
    const GroundParams& params, int workers, int* seedless_chunks) {
  if (frames.size() != traj.size())
    throw Error("frame count does not match pose count");

  std::vector<std::vector<std::uint8_t>> out(frames.size());
  if (seedless_chunks) *seedless_chunks = 0;
  for (auto [begin, end] : chunk_trajectory(traj, params.l)) {
    std::span<const PointCloud> chunk_frames(frames.data() + begin, end - begin);
    std::span<const Pose> chunk_poses(traj.poses().data() + begin, end - begin);
    try {
      auto flags = segment_ground_chunk(chunk_frames, chunk_poses, params, workers);
      for (int f = begin; f < end; ++f) out[f] = std::move(flags[f - begin]);
    } catch (const Error& e) {
      if (std::string(e.what()) != "no ground seeds") throw;
      for (int f = begin; f < end; ++f) out[f].assign(frames[f].size(), 0);
      if (seedless_chunks) ++*seedless_chunks;
    }
  }
  return out;
}

}  // namespace densedepth::ground
