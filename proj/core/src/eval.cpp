#include "densedepth/eval.hpp"

#include <cmath>

#include "densedepth/spatial.hpp"

namespace densedepth::eval {

namespace {

ClassificationReport report_from_counts(std::uint64_t tp_s, std::uint64_t fn_s,
                                        std::uint64_t tp_d, std::uint64_t fn_d) {
  ClassificationReport r;
  r.tp_static = tp_s;
  r.fn_static = fn_s;
  r.tp_dynamic = tp_d;
  r.fn_dynamic = fn_d;
  r.gt_static = tp_s + fn_s;
  r.gt_dynamic = tp_d + fn_d;
  r.sa = r.gt_static > 0 ? 100.0 * static_cast<double>(tp_s) / static_cast<double>(r.gt_static) : 0.0;
  if (r.gt_dynamic > 0)
    r.da = 100.0 * static_cast<double>(tp_d) / static_cast<double>(r.gt_dynamic);

  // F1 on the dynamic class; fn_s doubles as the false-positive count.
  std::uint64_t fp_d = fn_s;
  double denom = static_cast<double>(2 * tp_d + fp_d + fn_d);
  r.f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp_d) / denom : 0.0;
  return r;
}

}  // namespace

ClassificationReport score_classification(const std::vector<PointLabel>& predicted,
                                          const std::vector<std::uint8_t>& truth_dynamic) {
  ClassificationAccumulator acc;
  acc.add(predicted, truth_dynamic);
  return acc.report();
}

void ClassificationAccumulator::add(const std::vector<PointLabel>& predicted,
                                    const std::vector<std::uint8_t>& truth_dynamic) {
  if (predicted.size() != truth_dynamic.size())
    throw Error("prediction and truth length mismatch");
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    bool pred_dynamic = predicted[i] == PointLabel::Dynamic;
    if (truth_dynamic[i]) {
      pred_dynamic ? ++tp_d_ : ++fn_d_;
    } else {
      pred_dynamic ? ++fn_s_ : ++tp_s_;
    }
  }
}

ClassificationReport ClassificationAccumulator::report() const {
  return report_from_counts(tp_s_, fn_s_, tp_d_, fn_d_);
}

DepthReport score_depth(const DepthMap& predicted, const DepthMap& truth, MaskMode mode) {
  if (predicted.width() != truth.width() || predicted.height() != truth.height())
    throw Error("depth map dimensions differ");

  double sum_sq = 0.0, sum_abs = 0.0, sum_rel = 0.0;
  std::size_t n = 0, denominator_set = 0;
  for (std::size_t i = 0; i < predicted.pixel_count(); ++i) {
    float p = predicted.data()[i];
    float g = truth.data()[i];
    bool g_ok = std::isfinite(g);
    bool both = std::isfinite(p) && g_ok;
    denominator_set += (mode == MaskMode::TruthValid ? g_ok : both) ? 1 : 0;
    if (!both) continue;
    double e = static_cast<double>(p) - static_cast<double>(g);
    sum_sq += e * e;
    sum_abs += std::abs(e);
    sum_rel += std::abs(e) / static_cast<double>(g);
    ++n;
  }
  if (n == 0) throw Error("empty evaluation mask");

  DepthReport r;
  r.rmse = std::sqrt(sum_sq / static_cast<double>(n));
  r.mae = sum_abs / static_cast<double>(n);
  r.abs_rel = sum_rel / static_cast<double>(n);
  r.density = predicted.density();
  r.coverage = denominator_set > 0
                   ? static_cast<double>(n) / static_cast<double>(denominator_set)
                   : 0.0;
  r.compared_pixels = n;
  return r;
}

double point_to_point(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error("point-to-point needs non-empty clouds");
  KdTree tree(b.points);
  double sum = 0.0;
  for (const Eigen::Vector3d& p : a.points) {
    int nn = tree.knn(p, 1).front();
    sum += (b.points[nn] - p).norm();
  }
  return sum / static_cast<double>(a.size());
}

PointCloud deproject(const DepthMap& map, const Eigen::Matrix3d& K) {
  PointCloud cloud;
  cloud.frame_id = "camera";
  const Eigen::Matrix3d k_inv = K.inverse();
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      float d = map.at(x, y);
      if (!std::isfinite(d)) continue;
      Eigen::Vector3d ray = k_inv * Eigen::Vector3d(x + 0.5, y + 0.5, 1.0);
      cloud.points.push_back(ray * (static_cast<double>(d) / ray.z()));
    }
  }
  return cloud;
}

DepthReport cross_lidar_validate(const DepthMap& dense, const Pose& camera_pose_world,
                                 const CameraRig& rig, const PointCloud& other_world,
                                 const CrossLidarOptions& options) {
  rig.validate();
  Pose world_to_cam = camera_pose_world.inverse();

  double sum_sq = 0.0, sum_abs = 0.0, sum_rel = 0.0;
  std::size_t n = 0, candidates = 0;
  for (const Eigen::Vector3d& p_w : other_world.points) {
    Eigen::Vector3d p_c = world_to_cam.apply(p_w);
    if (p_c.z() <= 0.0) continue;
    Eigen::Vector3d h = rig.K * p_c;
    int x = static_cast<int>(std::floor(h.x() / p_c.z()));
    int y = static_cast<int>(std::floor(h.y() / p_c.z()));
    if (x < 0 || x >= dense.width() || y < 0 || y >= dense.height()) continue;
    float d = dense.at(x, y);
    if (!std::isfinite(d)) continue;
    ++candidates;
    // Parallax occlusion: the other sensor saw past a surface the camera
    // cannot see through.
    if (p_c.z() > static_cast<double>(d) + options.occlusion_margin) continue;
    double e = p_c.z() - static_cast<double>(d);
    sum_sq += e * e;
    sum_abs += std::abs(e);
    sum_rel += std::abs(e) / static_cast<double>(d);
    ++n;
  }
  if (n == 0) throw Error("no overlapping valid pixels");

  DepthReport r;
  r.rmse = std::sqrt(sum_sq / static_cast<double>(n));
  r.mae = sum_abs / static_cast<double>(n);
  r.abs_rel = sum_rel / static_cast<double>(n);
  r.density = dense.density();
  r.coverage = candidates > 0 ? static_cast<double>(n) / static_cast<double>(candidates) : 0.0;
  r.compared_pixels = n;
  return r;
}

}  // namespace densedepth::eval
