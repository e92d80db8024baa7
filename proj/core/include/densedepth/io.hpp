#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "densedepth/camera.hpp"
#include "densedepth/common.hpp"
#include "densedepth/geometry.hpp"

namespace densedepth::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Point cloud binary (x, y, z, intensity as little-endian float32 quadruples)

PointCloud read_cloud_bin(const fs::path& path);
void write_cloud_bin(const fs::path& path, const PointCloud& cloud);

// ---------------------------------------------------------------------------
// Pose files

enum class PoseFormat { KittiMatrix, Tum };

PoseFormat pose_format_from_string(const std::string& name);

/// kitti_matrix lines: 12 floats, row-major 3x4 [R|t]; timestamps are the
/// line index. tum lines: t x y z qx qy qz qw. Rotations whose determinant
/// deviates from 1 by more than 1e-3 are rejected.
Trajectory read_poses(const fs::path& path, PoseFormat format);
void write_poses(const fs::path& path, const Trajectory& traj, PoseFormat format);

// ---------------------------------------------------------------------------
// Depth maps

/// 16-bit grayscale PNG, pixel = round(depth * 256), 0 encodes invalid.
/// Depths above 255.99 m are clamped; the clamp count is returned.
int write_depth_png(const DepthMap& map, const fs::path& path);
DepthMap read_depth_png(const fs::path& path);

/// Lossless float32 dump: uint32 rows, uint32 cols, then row-major
/// little-endian float32 values (+inf kept for invalid pixels).
void write_depth_f32(const DepthMap& map, const fs::path& path);
DepthMap read_depth_f32(const fs::path& path);

/// Colorized 8-bit preview (near = warm, far = cool), for eyeballing.
void write_depth_preview_png(const DepthMap& map, const fs::path& path);

// ---------------------------------------------------------------------------
// Labels

/// One byte per point: 0 unlabeled, 1 ground, 2 static, 3 dynamic.
std::vector<PointLabel> read_labels(const fs::path& path);
void write_labels(const fs::path& path, const std::vector<PointLabel>& labels);

const std::set<std::uint32_t>& default_moving_class_ids();

/// Semantic ground-truth files: 4 bytes per point, lower 16 bits class id.
/// Returns the per-point dynamic flag. expected_count >= 0 enforces the
/// cloud/label length match.
std::vector<std::uint8_t> read_semantic_labels(
    const fs::path& path, std::int64_t expected_count = -1,
    const std::set<std::uint32_t>& moving_ids = default_moving_class_ids());

// ---------------------------------------------------------------------------
// Timestamps, rig, manifest

std::vector<double> read_timestamps(const fs::path& path);
void write_timestamps(const fs::path& path, const std::vector<double>& stamps);

CameraRig load_rig(const fs::path& path);
void save_rig(const fs::path& path, const CameraRig& rig);

/// Everything one sequence needs: frame clouds, the LiDAR trajectory,
/// camera timestamps, the rig, and where outputs go. Frame count must equal
/// pose count and every referenced file must exist.
struct SequenceManifest {
  std::vector<fs::path> clouds;
  fs::path poses;
  PoseFormat pose_format = PoseFormat::Tum;
  fs::path camera_timestamps;
  fs::path rig;
  fs::path output_dir;
  std::optional<fs::path> truth_labels_dir;  // per-frame truth label sidecars

  Trajectory load_trajectory() const { return read_poses(poses, pose_format); }
};

SequenceManifest load_manifest(const fs::path& path);
void save_manifest(const fs::path& path, const SequenceManifest& manifest);

// ---------------------------------------------------------------------------

/// FNV-1a over a file's full contents; stage caching keys on this.
std::uint64_t hash_file(const fs::path& path);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);
std::uint64_t hash_string(const std::string& s);

}  // namespace densedepth::io
