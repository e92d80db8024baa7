#include "densedepth/range_image.hpp"

namespace densedepth {

RangeImage::RangeImage(double dphi, double dtheta)
    : dphi_(dphi),
      dtheta_(dtheta),
      rows_(spherical_rows(dphi)),
      cols_(spherical_cols(dtheta)),
      range_(static_cast<std::size_t>(rows_) * cols_, kInvalidDepth),
      ground_(static_cast<std::size_t>(rows_) * cols_, 0) {
  if (dphi <= 0.0 || dtheta <= 0.0) throw Error("angular resolution must be positive");
}

void RangeImage::insert(const Eigen::Vector3d& p, PointLabel label) {
  SphericalPixel px = spherical_project(p, dphi_, dtheta_);
  std::size_t i = idx(px.row, px.col);
  float rho = static_cast<float>(px.rho);
  if (rho < range_[i]) {
    range_[i] = rho;
    ground_[i] = label == PointLabel::Ground ? 1 : 0;
  } else if (rho == range_[i] && label == PointLabel::Ground) {
    ground_[i] = 1;
  }
}

RangeImage build_range_image(const PointCloud& cloud, double dphi, double dtheta) {
  RangeImage image(dphi, dtheta);
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    image.insert(cloud.points[k], cloud.label(k));
  }
  return image;
}

}  // namespace densedepth
