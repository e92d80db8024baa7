#include "densedepth/synth.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "densedepth/parallel.hpp"

namespace densedepth::synth {

namespace {
using nlohmann::json;
}

void PlanePrimitive::in_plane_axes(Eigen::Vector3d& e1, Eigen::Vector3d& e2) const {
  Eigen::Vector3d ref = std::abs(n.z()) < 0.9 ? Eigen::Vector3d::UnitZ()
                                              : Eigen::Vector3d::UnitX();
  e1 = n.cross(ref).normalized();
  e2 = n.cross(e1).normalized();
}

Pose Mover::pose_at(double t) const {
  if (schedule.empty()) throw Error("mover schedule empty");
  if (schedule.size() == 1) return schedule.front();
  if (t <= schedule.front().timestamp) return schedule.front();
  if (t >= schedule.back().timestamp) return schedule.back();
  std::size_t hi = 1;
  while (hi < schedule.size() && schedule[hi].timestamp < t) ++hi;
  const Pose& a = schedule[hi - 1];
  const Pose& b = schedule[hi];
  double dt = b.timestamp - a.timestamp;
  double alpha = dt > 0 ? (t - a.timestamp) / dt : 0.0;
  Pose out;
  out.translation = a.translation + alpha * (b.translation - a.translation);
  out.rotation = slerp_shortest(a.rotation, b.rotation, alpha);
  out.timestamp = t;
  return out;
}

namespace {

constexpr double kRayEps = 1e-9;

std::optional<double> intersect_plane(const PlanePrimitive& plane,
                                      const Eigen::Vector3d& o,
                                      const Eigen::Vector3d& dir) {
  double denom = dir.dot(plane.n);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  double t = (plane.d - o.dot(plane.n)) / denom;
  if (t <= kRayEps) return std::nullopt;
  if (plane.ext1 > 0.0 || plane.ext2 > 0.0) {
    Eigen::Vector3d e1, e2;
    plane.in_plane_axes(e1, e2);
    Eigen::Vector3d rel = (o + t * dir) - plane.effective_origin();
    if (plane.ext1 > 0.0 && std::abs(rel.dot(e1)) > plane.ext1) return std::nullopt;
    if (plane.ext2 > 0.0 && std::abs(rel.dot(e2)) > plane.ext2) return std::nullopt;
  }
  return t;
}

/// Slab test against an axis-aligned box centered at c with half extents h.
std::optional<double> intersect_aabb(const Eigen::Vector3d& c, const Eigen::Vector3d& h,
                                     const Eigen::Vector3d& o, const Eigen::Vector3d& dir) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    double lo = c[axis] - h[axis], hi = c[axis] + h[axis];
    if (std::abs(dir[axis]) < 1e-15) {
      if (o[axis] < lo || o[axis] > hi) return std::nullopt;
      continue;
    }
    double t0 = (lo - o[axis]) / dir[axis];
    double t1 = (hi - o[axis]) / dir[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  double t = t_near > kRayEps ? t_near : t_far;
  if (t <= kRayEps) return std::nullopt;
  return t;
}

std::optional<double> intersect_mover(const Mover& mover, double time,
                                      const Eigen::Vector3d& o,
                                      const Eigen::Vector3d& dir) {
  // Rigid transform of the ray into the mover's local frame keeps t metric.
  Pose inv = mover.pose_at(time).inverse();
  Eigen::Vector3d lo = inv.apply(o);
  Eigen::Vector3d ldir = inv.rotation * dir;
  return intersect_aabb(mover.box.center, mover.box.half, lo, ldir);
}

}  // namespace

std::optional<HitInfo> raycast(const SceneScript& scene, double time,
                               const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& dir, double max_range,
                               bool include_movers) {
  std::optional<HitInfo> best;
  auto offer = [&](std::optional<double> t, PointLabel label) {
    if (!t || *t > max_range) return;
    if (!best || *t < best->t) best = HitInfo{*t, label};
  };
  for (const PlanePrimitive& plane : scene.planes)
    offer(intersect_plane(plane, origin, dir),
          plane.is_ground ? PointLabel::Ground : PointLabel::Static);
  for (const BoxPrimitive& box : scene.boxes)
    offer(intersect_aabb(box.center, box.half, origin, dir), PointLabel::Static);
  if (include_movers) {
    for (const Mover& mover : scene.movers)
      offer(intersect_mover(mover, time, origin, dir), PointLabel::Dynamic);
  }
  return best;
}

FrameTruth raycast_frame(const SceneScript& scene, double time,
                         const Pose& sensor_pose, std::uint64_t frame_index) {
  FrameTruth out;
  out.cloud.frame_id = "sensor";
  out.cloud.timestamp = time;

  std::mt19937_64 rng(scene.seed * 0x9e3779b97f4a7c15ull + frame_index);
  std::normal_distribution<double> noise(0.0, scene.sensor.noise_sigma);

  const int steps = scene.sensor.azimuth_steps;
  for (double elev_deg : scene.sensor.beam_elevations_deg) {
    double elev = deg2rad(elev_deg);
    double cos_e = std::cos(elev), sin_e = std::sin(elev);
    for (int s = 0; s < steps; ++s) {
      double az = 2.0 * kPi * s / steps;
      Eigen::Vector3d dir_local(cos_e * std::cos(az), cos_e * std::sin(az), sin_e);
      Eigen::Vector3d dir_world = sensor_pose.rotation * dir_local;
      auto hit = raycast(scene, time, sensor_pose.translation, dir_world,
                         scene.sensor.max_range, true);
      if (!hit) continue;
      double range = hit->t;
      if (scene.sensor.noise_sigma > 0.0) range = std::max(1e-3, range + noise(rng));
      out.cloud.points.push_back(range * dir_local);
      out.labels.push_back(hit->label);
    }
  }
  return out;
}

DepthMap analytic_depth(const SceneScript& scene, double time,
                        const Pose& camera_pose_world, const CameraRig& rig,
                        bool include_movers) {
  rig.validate();
  DepthMap map(rig.width, rig.height);
  const Eigen::Matrix3d k_inv = rig.K.inverse();

  parallel_for(static_cast<std::size_t>(rig.height), 0, [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      for (int x = 0; x < rig.width; ++x) {
        Eigen::Vector3d pix(x + 0.5, static_cast<double>(y) + 0.5, 1.0);
        Eigen::Vector3d dir_cam = (k_inv * pix).normalized();
        Eigen::Vector3d dir_world = camera_pose_world.rotation * dir_cam;
        auto hit = raycast(scene, time, camera_pose_world.translation, dir_world,
                           std::numeric_limits<double>::infinity(), include_movers);
        if (hit) map.at(x, static_cast<int>(y)) = static_cast<float>(hit->t * dir_cam.z());
      }
    }
  });
  return map;
}

std::vector<double> frame_times(const SceneScript& scene) {
  std::vector<double> times;
  times.reserve(scene.trajectory.size());
  for (const Pose& p : scene.trajectory) times.push_back(p.timestamp);
  return times;
}

io::SequenceManifest generate_sequence(const SceneScript& scene,
                                       const std::filesystem::path& out_dir,
                                       bool write_analytic_depth) {
  namespace fs = std::filesystem;
  if (scene.trajectory.empty()) throw Error("scene trajectory empty");
  fs::create_directories(out_dir / "clouds");
  fs::create_directories(out_dir / "truth_labels");

  io::SequenceManifest manifest;
  Trajectory traj(scene.trajectory);

  char name[32];
  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) {
    const Pose& pose = scene.trajectory[i];
    FrameTruth frame = raycast_frame(scene, pose.timestamp, pose, i);
    std::snprintf(name, sizeof(name), "%06zu.bin", i);
    fs::path cloud_path = out_dir / "clouds" / name;
    io::write_cloud_bin(cloud_path, frame.cloud);
    manifest.clouds.push_back(cloud_path);
    std::snprintf(name, sizeof(name), "%06zu.label", i);
    io::write_labels(out_dir / "truth_labels" / name, frame.labels);
  }

  manifest.poses = out_dir / "poses.txt";
  manifest.pose_format = io::PoseFormat::Tum;
  io::write_poses(manifest.poses, traj, io::PoseFormat::Tum);

  manifest.camera_timestamps = out_dir / "camera_times.txt";
  io::write_timestamps(manifest.camera_timestamps, scene.camera_timestamps);

  manifest.rig = out_dir / "rig.json";
  io::save_rig(manifest.rig, scene.rig);

  manifest.output_dir = out_dir / "output";
  manifest.truth_labels_dir = out_dir / "truth_labels";

  if (write_analytic_depth && !scene.camera_timestamps.empty()) {
    fs::create_directories(out_dir / "depth_truth");
    for (std::size_t i = 0; i < scene.camera_timestamps.size(); ++i) {
      double t = scene.camera_timestamps[i];
      Pose cam_world = traj.interpolate(t).compose(scene.rig.extrinsic);
      DepthMap truth = analytic_depth(scene, t, cam_world, scene.rig, true);
      std::snprintf(name, sizeof(name), "%06zu.bin", i);
      io::write_depth_f32(truth, out_dir / "depth_truth" / name);
    }
  }

  io::save_manifest(out_dir / "manifest.json", manifest);
  return manifest;
}

// ---------------------------------------------------------------------------
// Scene script file

namespace {

json pose_to_json(const Pose& p) {
  return json{{"t", p.timestamp},
              {"xyz", {p.translation.x(), p.translation.y(), p.translation.z()}},
              {"quat", {p.rotation.x(), p.rotation.y(), p.rotation.z(), p.rotation.w()}}};
}

Pose pose_from_json(const json& j) {
  Pose p;
  p.timestamp = j.value("t", 0.0);
  const json& xyz = j.at("xyz");
  p.translation = {xyz[0].get<double>(), xyz[1].get<double>(), xyz[2].get<double>()};
  if (j.contains("quat")) {
    const json& q = j["quat"];
    p.rotation = Eigen::Quaterniond(q[3].get<double>(), q[0].get<double>(),
                                    q[1].get<double>(), q[2].get<double>())
                     .normalized();
  }
  return p;
}

}  // namespace

SceneScript load_scene_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("malformed scene script: " + std::string(e.what()));
  }

  SceneScript scene;
  scene.seed = j.value("seed", 1ull);

  for (const json& p : j.value("planes", json::array())) {
    PlanePrimitive plane;
    const json& n = p.at("n");
    plane.n = Eigen::Vector3d(n[0].get<double>(), n[1].get<double>(), n[2].get<double>())
                  .normalized();
    plane.d = p.at("d").get<double>();
    if (p.contains("origin")) {
      const json& o = p["origin"];
      plane.origin = Eigen::Vector3d(o[0].get<double>(), o[1].get<double>(), o[2].get<double>());
    }
    plane.ext1 = p.value("ext1", -1.0);
    plane.ext2 = p.value("ext2", -1.0);
    plane.is_ground = p.value("ground", false);
    scene.planes.push_back(plane);
  }
  for (const json& b : j.value("boxes", json::array())) {
    BoxPrimitive box;
    const json& c = b.at("center");
    const json& h = b.at("half");
    box.center = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
    box.half = {h[0].get<double>(), h[1].get<double>(), h[2].get<double>()};
    scene.boxes.push_back(box);
  }
  for (const json& m : j.value("movers", json::array())) {
    Mover mover;
    const json& h = m.at("half");
    mover.box.half = {h[0].get<double>(), h[1].get<double>(), h[2].get<double>()};
    for (const json& s : m.at("schedule")) mover.schedule.push_back(pose_from_json(s));
    if (mover.schedule.empty()) throw Error("mover schedule empty");
    scene.movers.push_back(mover);
  }

  const json& sensor = j.at("sensor");
  scene.sensor.beam_elevations_deg = sensor.at("beams_deg").get<std::vector<double>>();
  std::sort(scene.sensor.beam_elevations_deg.begin(), scene.sensor.beam_elevations_deg.end());
  scene.sensor.azimuth_steps = sensor.at("azimuth_steps").get<int>();
  scene.sensor.max_range = sensor.value("max_range", 120.0);
  scene.sensor.noise_sigma = sensor.value("noise_sigma", 0.0);

  for (const json& p : j.at("trajectory")) scene.trajectory.push_back(pose_from_json(p));

  const json& cam = j.at("camera");
  const json& k = cam.at("K");
  for (int i = 0; i < 9; ++i) scene.rig.K(i / 3, i % 3) = k[i].get<double>();
  scene.rig.width = cam.at("width").get<int>();
  scene.rig.height = cam.at("height").get<int>();
  if (cam.contains("extrinsic")) scene.rig.extrinsic = pose_from_json(cam["extrinsic"]);
  scene.camera_timestamps = cam.at("timestamps").get<std::vector<double>>();
  return scene;
}

void save_scene_script(const std::filesystem::path& path, const SceneScript& scene) {
  json j;
  j["seed"] = scene.seed;
  j["planes"] = json::array();
  for (const PlanePrimitive& p : scene.planes) {
    json jp{{"n", {p.n.x(), p.n.y(), p.n.z()}}, {"d", p.d}, {"ground", p.is_ground}};
    if (p.origin)
      jp["origin"] = {p.origin->x(), p.origin->y(), p.origin->z()};
    if (p.ext1 > 0) jp["ext1"] = p.ext1;
    if (p.ext2 > 0) jp["ext2"] = p.ext2;
    j["planes"].push_back(jp);
  }
  j["boxes"] = json::array();
  for (const BoxPrimitive& b : scene.boxes)
    j["boxes"].push_back(json{{"center", {b.center.x(), b.center.y(), b.center.z()}},
                              {"half", {b.half.x(), b.half.y(), b.half.z()}}});
  j["movers"] = json::array();
  for (const Mover& m : scene.movers) {
    json jm{{"half", {m.box.half.x(), m.box.half.y(), m.box.half.z()}}};
    jm["schedule"] = json::array();
    for (const Pose& s : m.schedule) jm["schedule"].push_back(pose_to_json(s));
    j["movers"].push_back(jm);
  }
  j["sensor"] = json{{"beams_deg", scene.sensor.beam_elevations_deg},
                     {"azimuth_steps", scene.sensor.azimuth_steps},
                     {"max_range", scene.sensor.max_range},
                     {"noise_sigma", scene.sensor.noise_sigma}};
  j["trajectory"] = json::array();
  for (const Pose& p : scene.trajectory) j["trajectory"].push_back(pose_to_json(p));
  std::vector<double> k(9);
  for (int i = 0; i < 9; ++i) k[i] = scene.rig.K(i / 3, i % 3);
  j["camera"] = json{{"K", k},
                     {"width", scene.rig.width},
                     {"height", scene.rig.height},
                     {"extrinsic", pose_to_json(scene.rig.extrinsic)},
                     {"timestamps", scene.camera_timestamps}};

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace densedepth::synth
