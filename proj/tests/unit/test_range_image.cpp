#include <doctest.h>

#include <algorithm>
#include <random>

#include "densedepth/range_image.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace densedepth;

TEST_CASE("pixel keeps the minimum range") {
  PointCloud cloud;
  cloud.points = {{2, 0, 0}, {5, 0, 0}};
  RangeImage image = build_range_image(cloud, deg2rad(1.0), deg2rad(1.0));
  auto px = spherical_project({2, 0, 0}, deg2rad(1.0), deg2rad(1.0));
  CHECK(image.range(px.row, px.col) == doctest::Approx(2.0));
}

TEST_CASE("ground flag follows the argmin point") {
  PointCloud cloud;
  cloud.points = {{3, 0, -0.5}};
  cloud.labels = {PointLabel::Ground};
  RangeImage image = build_range_image(cloud, deg2rad(1.0), deg2rad(1.0));
  auto px = spherical_project(cloud.points[0], deg2rad(1.0), deg2rad(1.0));
  CHECK(image.is_ground(px.row, px.col));

  // A nearer non-ground point in the same pixel takes the flag away.
  cloud.points.push_back(cloud.points[0] * 0.5);
  cloud.labels.push_back(PointLabel::Static);
  RangeImage image2 = build_range_image(cloud, deg2rad(1.0), deg2rad(1.0));
  CHECK_FALSE(image2.is_ground(px.row, px.col));
}

TEST_CASE("empty cloud builds a valid all-invalid image") {
  PointCloud cloud;
  RangeImage image = build_range_image(cloud, deg2rad(0.5), deg2rad(0.5));
  for (int r = 0; r < image.rows(); r += 37)
    for (int c = 0; c < image.cols(); c += 53) CHECK_FALSE(image.valid(r, c));
}

TEST_CASE("range image matches the per-pixel brute-force oracle") {
  std::mt19937_64 rng(23);
  auto cloud = helpers::random_cloud(rng, 10000, 30.0);
  double dphi = deg2rad(0.4), dtheta = deg2rad(0.4);
  RangeImage image = build_range_image(cloud, dphi, dtheta);

  auto oracle = oracles::brute_force_range_pixels(cloud, dphi, dtheta);
  std::size_t valid_count = 0;
  for (int r = 0; r < image.rows(); ++r)
    for (int c = 0; c < image.cols(); ++c)
      if (image.valid(r, c)) ++valid_count;
  REQUIRE(valid_count == oracle.size());
  for (const auto& [key, rho] : oracle) {
    REQUIRE(image.valid(key.first, key.second));
    REQUIRE(image.range(key.first, key.second) == rho);
  }
}

TEST_CASE("range image is independent of insertion order") {
  std::mt19937_64 rng(27);
  auto cloud = helpers::random_cloud(rng, 5000, 15.0);
  cloud.labels.resize(cloud.size());
  for (auto& l : cloud.labels)
    l = (rng() % 3 == 0) ? PointLabel::Ground : PointLabel::Static;

  double res = deg2rad(0.5);
  RangeImage a = build_range_image(cloud, res, res);

  PointCloud shuffled = cloud;
  std::vector<std::size_t> perm(cloud.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.points[i] = cloud.points[perm[i]];
    shuffled.labels[i] = cloud.labels[perm[i]];
  }
  RangeImage b = build_range_image(shuffled, res, res);
  CHECK(a.data() == b.data());
  CHECK(a.ground_data() == b.ground_data());
}

TEST_CASE("reinserting the same cloud is idempotent") {
  std::mt19937_64 rng(29);
  auto cloud = helpers::random_cloud(rng, 1000, 10.0);
  double res = deg2rad(1.0);
  RangeImage once = build_range_image(cloud, res, res);
  RangeImage twice = build_range_image(cloud, res, res);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    twice.insert(cloud.points[i], cloud.label(i));
  CHECK(once.data() == twice.data());
}
