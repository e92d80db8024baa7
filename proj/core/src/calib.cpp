#include "densedepth/calib.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <random>

namespace densedepth::calib {

namespace {

/// Least-squares plane through the given points: centroid + smallest
/// covariance eigenvector.
Plane fit_plane_pca(const std::vector<Eigen::Vector3d>& points,
                    const std::vector<int>& indices) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (int i : indices) centroid += points[i];
  centroid /= static_cast<double>(indices.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int i : indices) {
    Eigen::Vector3d d = points[i] - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.eigenvalues()[1] <= 1e-12 * std::max(1.0, eig.eigenvalues()[2]))
    throw Error("degenerate plane input");

  Plane plane;
  plane.n = eig.eigenvectors().col(0).normalized();
  plane.d = centroid.dot(plane.n);
  plane.orient_toward_origin();
  return plane;
}

}  // namespace

PlaneFit ransac_plane(const PointCloud& cloud, const RansacOptions& options) {
  std::vector<int> usable;
  usable.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!options.crop || options.crop->contains(cloud.points[i]))
      usable.push_back(static_cast<int>(i));
  }
  if (usable.size() < 3) throw Error("degenerate plane input");

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);

  std::vector<int> best_inliers;
  for (int it = 0; it < options.iterations; ++it) {
    int a = usable[pick(rng)];
    int b = usable[pick(rng)];
    int c = usable[pick(rng)];
    if (a == b || a == c || b == c) continue;
    Eigen::Vector3d n = (cloud.points[b] - cloud.points[a])
                            .cross(cloud.points[c] - cloud.points[a]);
    double norm = n.norm();
    if (norm < 1e-12) continue;
    n /= norm;
    double d = cloud.points[a].dot(n);

    std::vector<int> inliers;
    inliers.reserve(usable.size());
    for (int i : usable) {
      if (std::abs(cloud.points[i].dot(n) - d) <= options.inlier_tolerance)
        inliers.push_back(i);
    }
    if (inliers.size() > best_inliers.size()) best_inliers = std::move(inliers);
  }
  if (best_inliers.size() < 3) throw Error("degenerate plane input");

  Plane refined = fit_plane_pca(cloud.points, best_inliers);

  // Final consensus against the refined plane.
  PlaneFit fit;
  fit.plane = refined;
  for (int i : usable) {
    if (std::abs(refined.signed_distance(cloud.points[i])) <= options.inlier_tolerance)
      fit.inliers.push_back(i);
  }
  if (fit.inliers.size() < 3) throw Error("degenerate plane input");
  return fit;
}

Eigen::Matrix3d solve_rotation(
    const std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>& pairs) {
  if (pairs.size() < 2) throw Error("rotation unobservable");

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (const auto& [n_c, n_l] : pairs) h += n_c.normalized() * n_l.normalized().transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // Fewer than two independent normal directions leave the rotation free
  // about the common axis.
  if (svd.singularValues()[1] < 1e-6 * std::max(1e-300, svd.singularValues()[0]))
    throw Error("rotation unobservable");

  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return v * d * u.transpose();
}

Eigen::Vector3d solve_translation(
    const std::vector<std::pair<Plane, Plane>>& pairs,
    const Eigen::Matrix3d& rotation) {
  if (pairs.size() < 3) throw Error("translation unobservable");

  Eigen::MatrixXd a(pairs.size(), 3);
  Eigen::VectorXd b(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Plane& cam = pairs[i].first;
    const Plane& lid = pairs[i].second;
    if (!cam.has_origin) throw Error("camera plane missing origin point");
    a.row(i) = lid.n.transpose();
    b[i] = lid.d - lid.n.dot(rotation * cam.p);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues()[2] < 1e-6 * std::max(1e-300, svd.singularValues()[0]))
    throw Error("translation unobservable");
  return svd.solve(b);
}

CalibrationResult calibrate(const std::vector<CalibrationView>& views,
                            const RansacOptions& options) {
  if (views.size() < 3) throw Error("calibration needs at least 3 views");

  CalibrationResult result;
  std::vector<std::pair<Plane, Plane>> pairs;  // (camera, lidar)
  std::vector<int> pair_view;                  // original view index per pair
  for (std::size_t i = 0; i < views.size(); ++i) {
    RansacOptions view_options = options;
    view_options.crop = views[i].crop ? views[i].crop : options.crop;
    // Per-view seed keeps runs reproducible but decorrelates the draws.
    view_options.seed = options.seed + i;
    try {
      PlaneFit fit = ransac_plane(views[i].cloud, view_options);
      Plane cam = views[i].camera_plane;
      cam.orient_toward_origin();
      pairs.emplace_back(cam, fit.plane);
      pair_view.push_back(static_cast<int>(i));
    } catch (const Error&) {
      result.skipped_views.push_back(static_cast<int>(i));
    }
  }
  if (pairs.size() < 3) throw Error("calibration needs at least 3 usable views");

  std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> normals;
  normals.reserve(pairs.size());
  for (const auto& [cam, lid] : pairs) normals.emplace_back(cam.n, lid.n);

  Eigen::Matrix3d r = solve_rotation(normals);
  Eigen::Vector3d u = solve_translation(pairs, r);

  result.extrinsic = Pose(u, Eigen::Quaterniond(r));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [cam, lid] = pairs[i];
    ViewResidual res;
    res.view = pair_view[i];
    res.normal_angle_deg =
        rad2deg(std::acos(std::clamp(lid.n.dot(r * cam.n), -1.0, 1.0)));
    res.offset_m = std::abs(lid.n.dot(r * cam.p + u) - lid.d);
    result.residuals.push_back(res);
  }
  return result;
}

}  // namespace densedepth::calib
