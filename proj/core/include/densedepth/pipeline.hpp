#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "densedepth/config.hpp"
#include "densedepth/io.hpp"

namespace densedepth {

/// Loads frames on demand and keeps a bounded number in memory. Safe for
/// concurrent readers.
class CloudCache {
public:
  using Loader = std::function<std::shared_ptr<const PointCloud>(int)>;

  CloudCache(Loader loader, std::size_t capacity);
  std::shared_ptr<const PointCloud> get(int index);

private:
  Loader loader_;
  std::size_t capacity_;
  std::mutex mutex_;
  std::unordered_map<int, std::shared_ptr<const PointCloud>> cache_;
  std::vector<int> eviction_order_;
};

struct StageStatus {
  std::string name;
  bool skipped = false;
  double seconds = 0.0;
  std::size_t items = 0;  // frames or depth maps produced

  double seconds_per_item() const { return items > 0 ? seconds / static_cast<double>(items) : 0.0; }
};

/// File-centric stage orchestration. Each stage writes its artifacts under
/// the manifest's output directory and leaves a content-hash stamp; a rerun
/// with unchanged inputs, parameters and outputs is skipped, so deleting one
/// stage's products reruns exactly that stage and whatever depends on it.
class Pipeline {
public:
  Pipeline(io::SequenceManifest manifest, PipelineConfig config, bool resume = true);

  StageStatus run_ground();
  StageStatus run_doc();
  StageStatus run_render();
  std::vector<StageStatus> run_annotate();

  const io::SequenceManifest& manifest() const { return manifest_; }
  const Trajectory& trajectory() const { return trajectory_; }

  std::filesystem::path ground_labels_dir() const;
  std::filesystem::path labels_dir() const;
  std::filesystem::path depth_dir() const;
  std::filesystem::path depth_f32_dir() const;

  std::filesystem::path label_path(int frame) const;
  std::filesystem::path depth_png_path(int camera_index) const;
  std::filesystem::path depth_f32_path(int camera_index) const;

  using LogFn = std::function<void(const std::string&)>;
  void set_log(LogFn log) { log_ = std::move(log); }

private:
  std::uint64_t inputs_hash() const;
  std::uint64_t ground_hash() const;
  std::uint64_t doc_hash() const;
  std::uint64_t render_hash() const;
  bool stage_fresh(const std::string& name, std::uint64_t hash,
                   const std::vector<std::filesystem::path>& outputs) const;
  void write_stamp(const std::string& name, std::uint64_t hash) const;
  void log(const std::string& message) const;

  io::SequenceManifest manifest_;
  PipelineConfig config_;
  bool resume_;
  Trajectory trajectory_;
  mutable std::uint64_t cached_inputs_hash_ = 0;
  LogFn log_;
};

}  // namespace densedepth
