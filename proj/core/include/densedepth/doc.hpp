#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "densedepth/common.hpp"
#include "densedepth/geometry.hpp"
#include "densedepth/range_image.hpp"

namespace densedepth::doc {

struct KeyFrameParams {
  double d_fine = 2.0;     // fine sampling spacing, meters
  double R_fine = 20.0;    // fine selection radius, meters
  double d_coarse = 10.0;  // coarse sampling spacing, meters
  double R_coarse = 50.0;  // coarse selection radius, meters

  void validate() const {
    if (!(d_fine > 0) || !(d_coarse >= d_fine) || !(R_fine > 0) || !(R_coarse >= R_fine))
      throw Error("invalid key frame parameters");
  }
};

struct VotingParams {
  double dphi = deg2rad(0.2);
  double dtheta = deg2rad(0.2);
  double tau = 0.2;  // free-space tolerance, meters
  int w = 5;         // vote window side, pixels, odd

  void validate() const {
    if (w < 1 || w % 2 == 0 || tau < 0 || dphi <= 0 || dtheta <= 0)
      throw Error("invalid voting parameters");
  }
};

enum class Vote { None, Static, Dynamic };

struct VoteTally {
  std::uint32_t c_static = 0;
  std::uint32_t c_dynamic = 0;
};

/// Key frame candidates for a query frame: the trajectory subsampled at
/// d_fine within R_fine of the query plus the subsample at d_coarse within
/// R_coarse, fine set first, query excluded, duplicates removed.
std::vector<int> select_key_frames(const Trajectory& traj, int query_index,
                                   const KeyFrameParams& params);

/// Greedy arc-length subsample: a pose is kept when its arc distance from
/// the last kept pose is at least `spacing`.
std::vector<int> subsample_trajectory(const Trajectory& traj, double spacing);

/// One vote of a key frame image on a projected query point.
///
/// The window around the center pixel is scanned in row-major order:
/// a range within tau votes Static immediately; a point in observed free
/// space records Dynamic and keeps scanning; a point behind the surface
/// aborts with None unless the center pixel was ground, which instead
/// tightens tau to zero. Invalid pixels carry no information and are
/// skipped; window columns wrap in azimuth.
Vote vote(int row, int col, double rho, const RangeImage& key_image,
          const VotingParams& params);

/// Hands out ground-flagged frames by index; the pipeline backs this with
/// disk loads, tests with in-memory vectors.
using FrameProvider = std::function<std::shared_ptr<const PointCloud>(int)>;

/// Memoized key frame range images: each distinct frame is projected once
/// per run, concurrent lookups share the build.
class KeyImageCache {
public:
  KeyImageCache(FrameProvider frames, VotingParams params, std::size_t max_images = 128);

  std::shared_ptr<const RangeImage> get(int frame_index);
  std::size_t build_count() const { return build_count_; }

private:
  FrameProvider frames_;
  VotingParams params_;
  std::size_t max_images_;
  std::mutex mutex_;
  std::unordered_map<int, std::shared_ptr<const RangeImage>> cache_;
  std::vector<int> eviction_order_;
  std::size_t build_count_ = 0;
};

/// Per-point {Ground, Static, Dynamic} labels for one frame. Ground points
/// keep their label and never enter the voting; every other point is
/// voted on by each selected key frame and goes Dynamic iff c_D > c_S.
/// With no key frames available, everything non-ground stays Static and
/// no_keyframes (when given) is set.
std::vector<PointLabel> classify_frame(const PointCloud& frame, int frame_index,
                                       const Trajectory& traj,
                                       KeyImageCache& key_images,
                                       const KeyFrameParams& kf,
                                       const VotingParams& vp, int workers = 0,
                                       bool* no_keyframes = nullptr);

/// classify_frame, but also exposes the raw tallies (ground points keep
/// zero tallies).
std::vector<PointLabel> classify_frame_with_tallies(
    const PointCloud& frame, int frame_index, const Trajectory& traj,
    KeyImageCache& key_images, const KeyFrameParams& kf, const VotingParams& vp,
    int workers, std::vector<VoteTally>* tallies, bool* no_keyframes = nullptr);

}  // namespace densedepth::doc
