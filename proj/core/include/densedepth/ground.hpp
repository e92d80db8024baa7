#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "densedepth/common.hpp"
#include "densedepth/geometry.hpp"

namespace densedepth::ground {

struct GroundParams {
  double s = 0.03;        // voxel downsample resolution, meters
  double l = 500.0;       // trajectory chunk length, meters
  double r_seed = 2.0;    // seed search radius, meters
  int k_nn = 30;          // neighbor count
  double alpha_deg = 15;  // max normal-to-vertical angle
  double delta = 0.04;    // point-to-plane admission threshold, meters

  void validate() const {
    if (s <= 0 || l <= 0 || r_seed <= 0 || k_nn <= 0 || delta <= 0 ||
        alpha_deg <= 0 || alpha_deg >= 90)
      throw Error("invalid ground parameters");
  }
};

/// Splits the trajectory into contiguous frame ranges [begin, end) whose
/// arc length stays within l. Ranges are disjoint and cover every frame.
std::vector<std::pair<int, int>> chunk_trajectory(const Trajectory& traj, double l);

/// Lowest-z point within horizontal radius r_seed of each pose translation,
/// deduplicated. Candidates with fewer than k_nn/2 neighbors within 0.5 m
/// are passed over as isolated returns. Throws "no ground seeds" when every
/// pose comes up empty.
std::vector<int> find_seeds(const PointCloud& merged_world,
                            std::span<const Pose> chunk_poses, double r_seed,
                            int k_nn);

/// k-NN covariance normals, oriented into the +z hemisphere. A false entry
/// in valid marks a degenerate neighborhood.
struct Normals {
  std::vector<Eigen::Vector3d> n;
  std::vector<std::uint8_t> valid;
};
Normals estimate_normals(const PointCloud& cloud, int k_nn, int workers = 0);

/// Seeded BFS region growing. A frontier point i admits neighbor j when
/// the normal of j stays within alpha of vertical and the point-to-plane
/// distance |(p_j - p_i) . n_i| stays within delta.
std::vector<std::uint8_t> grow_ground(const PointCloud& merged,
                                      const std::vector<int>& seeds,
                                      const Normals& normals,
                                      const GroundParams& params);

/// Full procedure for one chunk of sensor-frame clouds: merge into the
/// world frame, downsample, seed, grow, reproject labels through the
/// downsample map, split back per frame. Returns per-frame ground flags.
std::vector<std::vector<std::uint8_t>> segment_ground_chunk(
    std::span<const PointCloud> frames, std::span<const Pose> poses,
    const GroundParams& params, int workers = 0);

/// Chunked driver over a full sequence. A chunk with no ground seeds is
/// labeled all non-ground; the warning count is reported through the
/// optional counter.
std::vector<std::vector<std::uint8_t>> segment_ground(
    const std::vector<PointCloud>& frames, const Trajectory& traj,
    const GroundParams& params, int workers = 0, int* seedless_chunks = nullptr);

}  // namespace densedepth::ground
