#include "densedepth/doc.hpp"

#include <algorithm>
#include <cmath>

#include "densedepth/parallel.hpp"

namespace densedepth::doc {

std::vector<int> subsample_trajectory(const Trajectory& traj, double spacing) {
  std::vector<int> kept;
  if (traj.empty()) return kept;
  kept.push_back(0);
  double last_arc = traj.arc_length(0);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (traj.arc_length(i) - last_arc >= spacing) {
      kept.push_back(static_cast<int>(i));
      last_arc = traj.arc_length(i);
    }
  }
  return kept;
}

std::vector<int> select_key_frames(const Trajectory& traj, int query_index,
                                   const KeyFrameParams& params) {
  params.validate();
  if (query_index < 0 || query_index >= static_cast<int>(traj.size()))
    throw Error("query frame outside trajectory");

  std::vector<int> fine = subsample_trajectory(traj, params.d_fine);
  std::vector<int> coarse = subsample_trajectory(traj, params.d_coarse);

  std::vector<int> selected;
  std::vector<std::uint8_t> used(traj.size(), 0);
  auto take = [&](const std::vector<int>& set, double radius) {
    for (int j : set) {
      if (j == query_index || used[j]) continue;
      if (std::abs(traj.signed_distance(query_index, j)) < radius) {
        used[j] = 1;
        selected.push_back(j);
      }
    }
  };
  take(fine, params.R_fine);      // fine wins duplicates
  take(coarse, params.R_coarse);
  std::sort(selected.begin(), selected.end());
  return selected;
}

Vote vote(int row, int col, double rho, const RangeImage& image,
          const VotingParams& params) {
  if (!image.in_bounds(row, col) || !image.valid(row, col)) return Vote::None;

  double tau = params.tau;
  bool is_ground_pixel = false;
  if (image.is_ground(row, col)) {
    // Strict handling of ground occlusions: no tolerance for points that
    // project onto a ground return.
    tau = 0.0;
    is_ground_pixel = true;
  }

  const int half = params.w / 2;
  const int cols = image.cols();
  Vote recorded = Vote::None;
  for (int dr = -half; dr <= half; ++dr) {
    int r = row + dr;
    if (r < 0 || r >= image.rows()) continue;
    for (int dc = -half; dc <= half; ++dc) {
      int c = (col + dc) % cols;  // azimuth wraps
      if (c < 0) c += cols;
      float range = image.range(r, c);
      if (!std::isfinite(range)) continue;  // no information
      double diff = rho - static_cast<double>(range);
      if (std::abs(diff) < tau) return Vote::Static;
      if (diff < -tau) {
        recorded = Vote::Dynamic;  // query point sits in observed free space
      } else if (!is_ground_pixel) {
        return Vote::None;  // behind the measured surface: occluded
      }
    }
  }
  return recorded;
}

KeyImageCache::KeyImageCache(FrameProvider frames, VotingParams params,
                             std::size_t max_images)
    : frames_(std::move(frames)), params_(params), max_images_(std::max<std::size_t>(1, max_images)) {
  params_.validate();
}

std::shared_ptr<const RangeImage> KeyImageCache::get(int frame_index) {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(frame_index);
    if (it != cache_.end()) return it->second;
  }
  std::shared_ptr<const PointCloud> cloud = frames_(frame_index);
  if (!cloud) throw Error("frame provider returned no cloud");
  auto image = std::make_shared<RangeImage>(
      build_range_image(*cloud, params_.dphi, params_.dtheta));

  std::lock_guard lock(mutex_);
  auto it = cache_.find(frame_index);
  if (it != cache_.end()) return it->second;  // another worker won the build
  ++build_count_;
  if (cache_.size() >= max_images_) {
    cache_.erase(eviction_order_.front());
    eviction_order_.erase(eviction_order_.begin());
  }
  cache_.emplace(frame_index, image);
  eviction_order_.push_back(frame_index);
  return image;
}

std::vector<PointLabel> classify_frame_with_tallies(
    const PointCloud& frame, int frame_index, const Trajectory& traj,
    KeyImageCache& key_images, const KeyFrameParams& kf, const VotingParams& vp,
    int workers, std::vector<VoteTally>* tallies, bool* no_keyframes) {
  kf.validate();
  vp.validate();

  const std::size_t n = frame.size();
  std::vector<PointLabel> labels(n, PointLabel::Static);
  std::vector<VoteTally> local(n);

  std::vector<int> key_frames = select_key_frames(traj, frame_index, kf);
  if (no_keyframes) *no_keyframes = key_frames.empty();

  if (!key_frames.empty()) {
    const Pose& t_query = traj[frame_index];
    // Key-frame-outer order keeps one range image hot at a time.
    for (int j : key_frames) {
      std::shared_ptr<const RangeImage> image = key_images.get(j);
      Pose rel = traj[j].inverse().compose(t_query);
      const Eigen::Matrix3d rot = rel.rotation.toRotationMatrix();
      const Eigen::Vector3d trans = rel.translation;

      parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          if (frame.label(i) == PointLabel::Ground) continue;
          Eigen::Vector3d p = rot * frame.points[i] + trans;
          double rho = p.norm();
          if (rho <= 0.0) continue;
          // spherical_project, inlined for the hot loop
          double phi = std::abs(std::acos(std::clamp(p.z() / rho, -1.0, 1.0)));
          double theta = -std::atan2(p.y(), p.x());
          int row = std::clamp(static_cast<int>(phi / vp.dphi), 0, image->rows() - 1);
          int col = static_cast<int>((theta + kPi) / vp.dtheta) % image->cols();
          if (col < 0) col += image->cols();
          switch (vote(row, col, rho, *image, vp)) {
            case Vote::Static: ++local[i].c_static; break;
            case Vote::Dynamic: ++local[i].c_dynamic; break;
            case Vote::None: break;
          }
        }
      });
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (frame.label(i) == PointLabel::Ground) {
      labels[i] = PointLabel::Ground;
    } else {
      labels[i] = local[i].c_dynamic > local[i].c_static ? PointLabel::Dynamic
                                                         : PointLabel::Static;
    }
  }
  if (tallies) *tallies = std::move(local);
  return labels;
}

std::vector<PointLabel> classify_frame(const PointCloud& frame, int frame_index,
                                       const Trajectory& traj,
                                       KeyImageCache& key_images,
                                       const KeyFrameParams& kf,
                                       const VotingParams& vp, int workers,
                                       bool* no_keyframes) {
  return classify_frame_with_tallies(frame, frame_index, traj, key_images, kf, vp,
                                     workers, nullptr, no_keyframes);
}

}  // namespace densedepth::doc
