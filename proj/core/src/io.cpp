#include "densedepth/io.hpp"

#include <Eigen/Geometry>

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace densedepth::io {

namespace {

using nlohmann::json;

std::vector<char> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  in.seekg(0, std::ios::end);
  auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<char> bytes(static_cast<std::size_t>(size));
  if (size > 0) in.read(bytes.data(), size);
  if (!in) throw Error("cannot read file: " + path.string());
  return bytes;
}

void write_file_bytes(const fs::path& path, const void* data, std::size_t size) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw Error("write failed: " + path.string());
}

json parse_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_json_file(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  out << j.dump(2) << "\n";
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw Error("unknown key '" + it.key() + "' in " + where);
  }
}

Eigen::Vector3d vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("expected 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Cloud binary

PointCloud read_cloud_bin(const fs::path& path) {
  std::vector<char> bytes = read_file_bytes(path);
  if (bytes.size() % 16 != 0) throw Error("corrupt cloud file: " + path.string());
  std::size_t n = bytes.size() / 16;
  PointCloud cloud;
  cloud.points.resize(n);
  const float* f = reinterpret_cast<const float*>(bytes.data());
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points[i] = Eigen::Vector3d(f[4 * i + 0], f[4 * i + 1], f[4 * i + 2]);
    if (!cloud.points[i].allFinite())
      throw Error("corrupt cloud file: non-finite coordinates in " + path.string());
  }
  return cloud;
}

void write_cloud_bin(const fs::path& path, const PointCloud& cloud) {
  std::vector<float> buf(cloud.size() * 4, 0.0f);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    buf[4 * i + 0] = static_cast<float>(cloud.points[i].x());
    buf[4 * i + 1] = static_cast<float>(cloud.points[i].y());
    buf[4 * i + 2] = static_cast<float>(cloud.points[i].z());
  }
  write_file_bytes(path, buf.data(), buf.size() * sizeof(float));
}

// ---------------------------------------------------------------------------
// Poses

PoseFormat pose_format_from_string(const std::string& name) {
  if (name == "kitti_matrix") return PoseFormat::KittiMatrix;
  if (name == "tum") return PoseFormat::Tum;
  throw Error("unknown pose format: " + name);
}

namespace {

Pose pose_from_kitti_values(const std::vector<double>& v, double timestamp) {
  Eigen::Matrix3d r;
  r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
  if (std::abs(r.determinant() - 1.0) > 1e-3) throw Error("invalid rotation");
  Eigen::Vector3d u(v[3], v[7], v[11]);
  return Pose(u, Eigen::Quaterniond(r), timestamp);
}

}  // namespace

Trajectory read_poses(const fs::path& path, PoseFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  std::vector<Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (format == PoseFormat::KittiMatrix) {
      if (v.size() != 12)
        throw Error("malformed kitti_matrix pose line in " + path.string());
      poses.push_back(pose_from_kitti_values(v, static_cast<double>(line_no)));
    } else {
      if (v.size() != 8) throw Error("malformed tum pose line in " + path.string());
      Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
      if (q.norm() < 1e-12) throw Error("invalid rotation");
      q.normalize();
      poses.emplace_back(Eigen::Vector3d(v[1], v[2], v[3]), q, v[0]);
    }
    ++line_no;
  }
  return Trajectory(std::move(poses));
}

void write_poses(const fs::path& path, const Trajectory& traj, PoseFormat format) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  out << std::setprecision(17);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Pose& p = traj[i];
    if (format == PoseFormat::KittiMatrix) {
      Eigen::Matrix3d r = p.rotation.toRotationMatrix();
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) out << r(row, col) << " ";
        out << p.translation[row] << (row == 2 ? "" : " ");
      }
      out << "\n";
    } else {
      out << p.timestamp << " " << p.translation.x() << " " << p.translation.y()
          << " " << p.translation.z() << " " << p.rotation.x() << " "
          << p.rotation.y() << " " << p.rotation.z() << " " << p.rotation.w()
          << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Float depth dump

void write_depth_f32(const DepthMap& map, const fs::path& path) {
  std::vector<char> buf(8 + map.pixel_count() * sizeof(float));
  std::uint32_t rows = static_cast<std::uint32_t>(map.height());
  std::uint32_t cols = static_cast<std::uint32_t>(map.width());
  std::memcpy(buf.data(), &rows, 4);
  std::memcpy(buf.data() + 4, &cols, 4);
  std::memcpy(buf.data() + 8, map.data().data(), map.pixel_count() * sizeof(float));
  write_file_bytes(path, buf.data(), buf.size());
}

DepthMap read_depth_f32(const fs::path& path) {
  std::vector<char> bytes = read_file_bytes(path);
  if (bytes.size() < 8) throw Error("corrupt depth dump: " + path.string());
  std::uint32_t rows, cols;
  std::memcpy(&rows, bytes.data(), 4);
  std::memcpy(&cols, bytes.data() + 4, 4);
  std::size_t expected = 8 + static_cast<std::size_t>(rows) * cols * sizeof(float);
  if (bytes.size() != expected) throw Error("corrupt depth dump: " + path.string());
  DepthMap map(static_cast<int>(cols), static_cast<int>(rows));
  std::memcpy(map.data().data(), bytes.data() + 8,
              static_cast<std::size_t>(rows) * cols * sizeof(float));
  return map;
}

// ---------------------------------------------------------------------------
// Labels

std::vector<PointLabel> read_labels(const fs::path& path) {
  std::vector<char> bytes = read_file_bytes(path);
  std::vector<PointLabel> labels(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    std::uint8_t b = static_cast<std::uint8_t>(bytes[i]);
    if (b > 3) throw Error("corrupt label file: " + path.string());
    labels[i] = static_cast<PointLabel>(b);
  }
  return labels;
}

void write_labels(const fs::path& path, const std::vector<PointLabel>& labels) {
  static_assert(sizeof(PointLabel) == 1);
  write_file_bytes(path, labels.data(), labels.size());
}

const std::set<std::uint32_t>& default_moving_class_ids() {
  // SemanticKITTI moving classes: vehicles, persons, riders.
  static const std::set<std::uint32_t> ids = {252, 253, 254, 255, 256, 257, 258, 259};
  return ids;
}

std::vector<std::uint8_t> read_semantic_labels(const fs::path& path,
                                               std::int64_t expected_count,
                                               const std::set<std::uint32_t>& moving_ids) {
  std::vector<char> bytes = read_file_bytes(path);
  if (bytes.size() % 4 != 0) throw Error("corrupt semantic label file: " + path.string());
  std::size_t n = bytes.size() / 4;
  if (expected_count >= 0 && n != static_cast<std::size_t>(expected_count))
    throw Error("label count does not match cloud size: " + path.string());
  std::vector<std::uint8_t> dynamic(n, 0);
  const std::uint32_t* raw = reinterpret_cast<const std::uint32_t*>(bytes.data());
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t class_id = raw[i] & 0xFFFFu;
    dynamic[i] = moving_ids.count(class_id) ? 1 : 0;
  }
  return dynamic;
}

// ---------------------------------------------------------------------------
// Timestamps

std::vector<double> read_timestamps(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  std::vector<double> stamps;
  double t;
  while (in >> t) stamps.push_back(t);
  return stamps;
}

void write_timestamps(const fs::path& path, const std::vector<double>& stamps) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  out << std::setprecision(17);
  for (double t : stamps) out << t << "\n";
}

// ---------------------------------------------------------------------------
// Rig

CameraRig load_rig(const fs::path& path) {
  json j = parse_json_file(path);
  reject_unknown_keys(j, {"K", "distortion", "C_cl", "width", "height"},
                      "rig file " + path.string());
  CameraRig rig;
  const json& k = j.at("K");
  if (!k.is_array() || k.size() != 9) throw Error("rig K must be 9 numbers");
  for (int i = 0; i < 9; ++i) rig.K(i / 3, i % 3) = k[i].get<double>();
  if (j.contains("distortion"))
    rig.distortion = j["distortion"].get<std::vector<double>>();
  const json& c = j.at("C_cl");
  if (!c.is_array() || c.size() != 16) throw Error("rig C_cl must be 16 numbers");
  Eigen::Matrix4d m;
  for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = c[i].get<double>();
  Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  if (std::abs(r.determinant() - 1.0) > 1e-3) throw Error("invalid rotation");
  rig.extrinsic = Pose(m.topRightCorner<3, 1>(), Eigen::Quaterniond(r));
  rig.width = j.at("width").get<int>();
  rig.height = j.at("height").get<int>();
  rig.validate();
  return rig;
}

void save_rig(const fs::path& path, const CameraRig& rig) {
  json j;
  std::vector<double> k(9);
  for (int i = 0; i < 9; ++i) k[i] = rig.K(i / 3, i % 3);
  j["K"] = k;
  j["distortion"] = rig.distortion;
  Eigen::Matrix4d m = rig.extrinsic.matrix();
  std::vector<double> c(16);
  for (int i = 0; i < 16; ++i) c[i] = m(i / 4, i % 4);
  j["C_cl"] = c;
  j["width"] = rig.width;
  j["height"] = rig.height;
  write_json_file(path, j);
}

// ---------------------------------------------------------------------------
// Manifest

SequenceManifest load_manifest(const fs::path& path) {
  json j = parse_json_file(path);
  reject_unknown_keys(j,
                      {"clouds", "cloud_dir", "poses", "pose_format",
                       "camera_timestamps", "rig", "output_dir", "truth_labels_dir"},
                      "manifest " + path.string());
  SequenceManifest m;
  fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto resolve = [&](const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p : base / p;
  };

  if (j.contains("clouds")) {
    for (const auto& c : j["clouds"]) m.clouds.push_back(resolve(c.get<std::string>()));
  } else if (j.contains("cloud_dir")) {
    fs::path dir = resolve(j["cloud_dir"].get<std::string>());
    if (!fs::is_directory(dir)) throw Error("cloud_dir does not exist: " + dir.string());
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".bin") m.clouds.push_back(e.path());
    std::sort(m.clouds.begin(), m.clouds.end());
  } else {
    throw Error("manifest needs 'clouds' or 'cloud_dir'");
  }

  m.poses = resolve(j.at("poses").get<std::string>());
  m.pose_format = pose_format_from_string(j.value("pose_format", "tum"));
  m.camera_timestamps = resolve(j.at("camera_timestamps").get<std::string>());
  m.rig = resolve(j.at("rig").get<std::string>());
  m.output_dir = resolve(j.at("output_dir").get<std::string>());
  if (j.contains("truth_labels_dir"))
    m.truth_labels_dir = resolve(j["truth_labels_dir"].get<std::string>());

  for (const auto& c : m.clouds)
    if (!fs::exists(c)) throw Error("missing cloud file: " + c.string());
  for (const fs::path* p : {&m.poses, &m.camera_timestamps, &m.rig})
    if (!fs::exists(*p)) throw Error("missing manifest file: " + p->string());

  Trajectory traj = m.load_trajectory();
  if (traj.size() != m.clouds.size())
    throw Error("manifest frame count does not match pose count");
  return m;
}

void save_manifest(const fs::path& path, const SequenceManifest& m) {
  json j;
  fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto rel = [&](const fs::path& p) {
    std::error_code ec;
    fs::path r = fs::relative(p, base, ec);
    return ec ? p.string() : r.string();
  };
  std::vector<std::string> clouds;
  for (const auto& c : m.clouds) clouds.push_back(rel(c));
  j["clouds"] = clouds;
  j["poses"] = rel(m.poses);
  j["pose_format"] = m.pose_format == PoseFormat::Tum ? "tum" : "kitti_matrix";
  j["camera_timestamps"] = rel(m.camera_timestamps);
  j["rig"] = rel(m.rig);
  j["output_dir"] = rel(m.output_dir);
  if (m.truth_labels_dir) j["truth_labels_dir"] = rel(*m.truth_labels_dir);
  write_json_file(path, j);
}

// ---------------------------------------------------------------------------
// Hashing

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  seed ^= value + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2);
  return seed;
}

std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace densedepth::io
