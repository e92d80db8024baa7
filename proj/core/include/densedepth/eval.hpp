#pragma once

#include <optional>
#include <vector>

#include "densedepth/camera.hpp"
#include "densedepth/common.hpp"
#include "densedepth/geometry.hpp"

namespace densedepth::eval {

/// Static/Dynamic accuracy plus the dynamic-class F1, with the raw
/// confusion counts. Ground and static predictions both count as
/// predicted-static.
struct ClassificationReport {
  double sa = 0.0;            // percent
  std::optional<double> da;   // percent; empty when no dynamic truth exists
  double f1 = 0.0;            // dynamic class
  std::uint64_t tp_static = 0, fn_static = 0;
  std::uint64_t tp_dynamic = 0, fn_dynamic = 0;
  std::uint64_t gt_static = 0, gt_dynamic = 0;
};

ClassificationReport score_classification(const std::vector<PointLabel>& predicted,
                                          const std::vector<std::uint8_t>& truth_dynamic);

/// Accumulates several frames into one report.
class ClassificationAccumulator {
public:
  void add(const std::vector<PointLabel>& predicted,
           const std::vector<std::uint8_t>& truth_dynamic);
  ClassificationReport report() const;

private:
  std::uint64_t tp_s_ = 0, fn_s_ = 0, tp_d_ = 0, fn_d_ = 0;
};

enum class MaskMode {
  Intersection,  // pixels valid in both maps
  TruthValid,    // denominators follow the truth-valid set
};

struct DepthReport {
  double rmse = 0.0;     // meters
  double mae = 0.0;      // meters
  double abs_rel = 0.0;  // unitless
  double density = 0.0;  // predicted valid fraction of the full image
  double coverage = 0.0; // compared pixels / denominator set
  std::size_t compared_pixels = 0;
};

/// Error metrics over pixels valid in both maps. Throws "empty evaluation
/// mask" when no pixel qualifies.
DepthReport score_depth(const DepthMap& predicted, const DepthMap& truth,
                        MaskMode mode = MaskMode::Intersection);

/// Mean nearest-neighbor distance from each point of a to b.
double point_to_point(const PointCloud& a, const PointCloud& b);

/// Lifts a depth map back to a camera-frame cloud through K^{-1}.
PointCloud deproject(const DepthMap& map, const Eigen::Matrix3d& K);

struct CrossLidarOptions {
  double occlusion_margin = 0.5;  // meters
};

/// Two-sensor consistency check: projects the second sensor's world-frame
/// points into the camera of the dense map, drops pixels the camera could
/// not see (point behind the dense surface by more than the occlusion
/// margin), and scores the rest. Throws "no overlapping valid pixels" when
/// everything is filtered away.
DepthReport cross_lidar_validate(const DepthMap& dense, const Pose& camera_pose_world,
                                 const CameraRig& rig, const PointCloud& other_world,
                                 const CrossLidarOptions& options = {});

}  // namespace densedepth::eval
