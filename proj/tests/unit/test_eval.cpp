#include <doctest.h>

#include <random>

#include "densedepth/eval.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace densedepth;

TEST_CASE("perfect prediction scores perfectly") {
  std::vector<PointLabel> pred = {PointLabel::Static, PointLabel::Dynamic,
                                  PointLabel::Ground, PointLabel::Dynamic};
  std::vector<std::uint8_t> truth = {0, 1, 0, 1};
  auto r = eval::score_classification(pred, truth);
  CHECK(r.sa == 100.0);
  REQUIRE(r.da.has_value());
  CHECK(*r.da == 100.0);
  CHECK(r.f1 == doctest::Approx(1.0));
}

TEST_CASE("all-static prediction has zero dynamic accuracy") {
  std::vector<PointLabel> pred(10, PointLabel::Static);
  std::vector<std::uint8_t> truth(10, 0);
  truth[3] = truth[7] = 1;
  auto r = eval::score_classification(pred, truth);
  CHECK(r.sa == 100.0);
  REQUIRE(r.da.has_value());
  CHECK(*r.da == 0.0);
  CHECK(r.f1 == 0.0);
}

TEST_CASE("no dynamic truth leaves DA undefined") {
  std::vector<PointLabel> pred(5, PointLabel::Static);
  std::vector<std::uint8_t> truth(5, 0);
  auto r = eval::score_classification(pred, truth);
  CHECK_FALSE(r.da.has_value());
}

TEST_CASE("ground predictions count as static") {
  std::vector<PointLabel> pred = {PointLabel::Ground, PointLabel::Ground};
  std::vector<std::uint8_t> truth = {0, 1};
  auto r = eval::score_classification(pred, truth);
  CHECK(r.sa == 100.0);
  CHECK(*r.da == 0.0);
}

TEST_CASE("classification counts follow a constructed confusion") {
  // 6 truth-static (4 called static, 2 called dynamic),
  // 4 truth-dynamic (3 called dynamic, 1 called static)
  std::vector<PointLabel> pred = {
      PointLabel::Static, PointLabel::Static,  PointLabel::Ground, PointLabel::Static,
      PointLabel::Dynamic, PointLabel::Dynamic,
      PointLabel::Dynamic, PointLabel::Dynamic, PointLabel::Dynamic, PointLabel::Static};
  std::vector<std::uint8_t> truth = {0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  auto r = eval::score_classification(pred, truth);
  CHECK(r.sa == doctest::Approx(100.0 * 4.0 / 6.0));
  CHECK(*r.da == doctest::Approx(100.0 * 3.0 / 4.0));
  // precision 3/5, recall 3/4 -> F1 = 2*0.6*0.75/1.35
  CHECK(r.f1 == doctest::Approx(2.0 * 0.6 * 0.75 / 1.35));
}

TEST_CASE("identical depth maps score zero error") {
  DepthMap a(8, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) a.at(x, y) = 5.0f + x + y;
  auto r = eval::score_depth(a, a);
  CHECK(r.rmse == 0.0);
  CHECK(r.mae == 0.0);
  CHECK(r.abs_rel == 0.0);
  CHECK(r.density == 1.0);
}

TEST_CASE("a one-meter bias on ten meters gives the textbook numbers") {
  DepthMap truth(10, 10), pred(10, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      truth.at(x, y) = 10.0f;
      pred.at(x, y) = 11.0f;
    }
  auto r = eval::score_depth(pred, truth);
  CHECK(r.rmse == doctest::Approx(1.0));
  CHECK(r.mae == doctest::Approx(1.0));
  CHECK(r.abs_rel == doctest::Approx(0.1));
}

TEST_CASE("depth metrics match an independent recomputation") {
  std::mt19937_64 rng(163);
  std::uniform_real_distribution<double> u(1.0, 60.0);
  DepthMap truth(20, 15), pred(20, 15);
  for (int y = 0; y < 15; ++y)
    for (int x = 0; x < 20; ++x) {
      if ((x + y) % 4 == 0) continue;  // hole in the truth
      truth.at(x, y) = static_cast<float>(u(rng));
      if ((x * 3 + y) % 5 == 0) continue;  // hole in the prediction
      pred.at(x, y) = static_cast<float>(u(rng));
    }
  auto r = eval::score_depth(pred, truth);

  double sq = 0, ab = 0, rel = 0;
  int n = 0;
  for (int y = 0; y < 15; ++y)
    for (int x = 0; x < 20; ++x) {
      if (!pred.valid(x, y) || !truth.valid(x, y)) continue;
      double e = static_cast<double>(pred.at(x, y)) - truth.at(x, y);
      sq += e * e;
      ab += std::abs(e);
      rel += std::abs(e) / truth.at(x, y);
      ++n;
    }
  REQUIRE(n > 0);
  CHECK(r.compared_pixels == static_cast<std::size_t>(n));
  CHECK(r.rmse == doctest::Approx(std::sqrt(sq / n)).epsilon(1e-12));
  CHECK(r.mae == doctest::Approx(ab / n).epsilon(1e-12));
  CHECK(r.abs_rel == doctest::Approx(rel / n).epsilon(1e-12));
}

TEST_CASE("metrics are permutation invariant") {
  std::mt19937_64 rng(167);
  std::uniform_real_distribution<double> u(1.0, 40.0);
  DepthMap truth(12, 12), pred(12, 12);
  for (int i = 0; i < 144; ++i) {
    truth.data()[i] = static_cast<float>(u(rng));
    pred.data()[i] = static_cast<float>(u(rng));
  }
  auto base = eval::score_depth(pred, truth);

  // same pixel pairs in scrambled positions
  std::vector<int> perm(144);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  DepthMap truth2(12, 12), pred2(12, 12);
  for (int i = 0; i < 144; ++i) {
    truth2.data()[i] = truth.data()[perm[i]];
    pred2.data()[i] = pred.data()[perm[i]];
  }
  auto scrambled = eval::score_depth(pred2, truth2);
  CHECK(base.rmse == doctest::Approx(scrambled.rmse).epsilon(1e-12));
  CHECK(base.mae == doctest::Approx(scrambled.mae).epsilon(1e-12));
}

TEST_CASE("empty mask is a typed error") {
  DepthMap a(4, 4), b(4, 4);
  a.at(0, 0) = 1.0f;  // valid only where b is invalid
  b.at(1, 1) = 1.0f;
  CHECK_THROWS_WITH_AS(eval::score_depth(a, b), "empty evaluation mask", Error);
}

TEST_CASE("point-to-point of identical clouds is zero") {
  std::mt19937_64 rng(173);
  auto cloud = helpers::random_cloud(rng, 500, 10.0);
  CHECK(eval::point_to_point(cloud, cloud) == 0.0);
}

TEST_CASE("a rigid 5 cm shift reads as 5 cm for isolated points") {
  PointCloud a;
  for (int i = 0; i < 10; ++i) a.points.emplace_back(i * 5.0, 0.0, 0.0);
  PointCloud b = a;
  for (auto& p : b.points) p.z() += 0.05;
  CHECK(eval::point_to_point(a, b) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("point-to-point matches the quadratic oracle") {
  std::mt19937_64 rng(179);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = helpers::random_cloud(rng, 300, 8.0);
    auto b = helpers::random_cloud(rng, 400, 8.0);
    CHECK(eval::point_to_point(a, b) ==
          doctest::Approx(oracles::linear_point_to_point(a.points, b.points))
              .epsilon(1e-12));
  }
}

TEST_CASE("deprojection inverts the pinhole model") {
  CameraRig rig = helpers::simple_rig(32, 24, 26.0);
  DepthMap map(32, 24);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 32; ++x) map.at(x, y) = 7.5f;
  PointCloud cloud = eval::deproject(map, rig.K);
  REQUIRE(cloud.size() == 32 * 24);
  for (const auto& p : cloud.points) {
    CHECK(p.z() == doctest::Approx(7.5).epsilon(1e-6));
  }
}

TEST_CASE("cross-lidar validation on a shared exact scene is tight") {
  // dense map and second sensor agree on a wall at 12 m
  CameraRig rig = helpers::simple_rig(64, 48, 52.0);
  Pose cam_world;  // camera at origin looking +z (world == camera frame)
  DepthMap dense(64, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) dense.at(x, y) = 12.0f;

  PointCloud other;
  std::mt19937_64 rng(181);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int i = 0; i < 2000; ++i) other.points.emplace_back(u(rng), u(rng) * 0.7, 12.0);

  auto r = eval::cross_lidar_validate(dense, cam_world, rig, other);
  CHECK(r.rmse < 1e-6);
  CHECK(r.compared_pixels > 1000);
}

TEST_CASE("occluded points are filtered, not scored") {
  CameraRig rig = helpers::simple_rig(64, 48, 52.0);
  Pose cam_world;
  DepthMap dense(64, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) dense.at(x, y) = 5.0f;  // near surface

  PointCloud other;
  for (int i = 0; i < 100; ++i) other.points.emplace_back(0.02 * i - 1.0, 0.0, 12.0);
  // every point is 7 m behind the dense surface: all filtered -> error
  CHECK_THROWS_WITH_AS(eval::cross_lidar_validate(dense, cam_world, rig, other),
                       "no overlapping valid pixels", Error);
}

TEST_CASE("rmse scales linearly under uniform bias injection") {
  DepthMap truth(16, 16), pred(16, 16);
  for (int i = 0; i < 256; ++i) truth.data()[i] = 20.0f;
  for (double bias : {0.5, 1.0, 2.0}) {
    for (int i = 0; i < 256; ++i) pred.data()[i] = static_cast<float>(20.0 + bias);
    auto r = eval::score_depth(pred, truth);
    CHECK(r.rmse == doctest::Approx(bias).epsilon(1e-6));
    CHECK(r.mae == doctest::Approx(bias).epsilon(1e-6));
  }
}
