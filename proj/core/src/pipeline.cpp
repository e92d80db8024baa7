#include "densedepth/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "densedepth/doc.hpp"
#include "densedepth/ground.hpp"
#include "densedepth/parallel.hpp"
#include "densedepth/render.hpp"

namespace densedepth {

namespace fs = std::filesystem;

namespace {

std::string frame_name(int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d%s", index, ext);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

CloudCache::CloudCache(Loader loader, std::size_t capacity)
    : loader_(std::move(loader)), capacity_(std::max<std::size_t>(1, capacity)) {}

std::shared_ptr<const PointCloud> CloudCache::get(int index) {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(index);
    if (it != cache_.end()) return it->second;
  }
  std::shared_ptr<const PointCloud> cloud = loader_(index);
  std::lock_guard lock(mutex_);
  auto it = cache_.find(index);
  if (it != cache_.end()) return it->second;
  if (cache_.size() >= capacity_) {
    cache_.erase(eviction_order_.front());
    eviction_order_.erase(eviction_order_.begin());
  }
  cache_.emplace(index, cloud);
  eviction_order_.push_back(index);
  return cloud;
}

Pipeline::Pipeline(io::SequenceManifest manifest, PipelineConfig config, bool resume)
    : manifest_(std::move(manifest)),
      config_(std::move(config)),
      resume_(resume),
      trajectory_(manifest_.load_trajectory()) {
  config_.validate();
  if (trajectory_.size() != manifest_.clouds.size())
    throw Error("manifest frame count does not match pose count");
}

fs::path Pipeline::ground_labels_dir() const { return manifest_.output_dir / "ground_labels"; }
fs::path Pipeline::labels_dir() const { return manifest_.output_dir / "labels"; }
fs::path Pipeline::depth_dir() const { return manifest_.output_dir / "depth"; }
fs::path Pipeline::depth_f32_dir() const { return manifest_.output_dir / "depth_f32"; }

fs::path Pipeline::label_path(int frame) const {
  return labels_dir() / frame_name(frame, ".label");
}
fs::path Pipeline::depth_png_path(int camera_index) const {
  return depth_dir() / frame_name(camera_index, ".png");
}
fs::path Pipeline::depth_f32_path(int camera_index) const {
  return depth_f32_dir() / frame_name(camera_index, ".bin");
}

void Pipeline::log(const std::string& message) const {
  if (log_) {
    log_(message);
  } else {
    std::cout << message << "\n";
  }
}

std::uint64_t Pipeline::inputs_hash() const {
  if (cached_inputs_hash_ != 0) return cached_inputs_hash_;
  std::uint64_t h = io::hash_string("inputs");
  for (const fs::path& c : manifest_.clouds)
    h = io::hash_combine(h, io::hash_file(c));
  h = io::hash_combine(h, io::hash_file(manifest_.poses));
  cached_inputs_hash_ = h;
  return h;
}

std::uint64_t Pipeline::ground_hash() const {
  std::ostringstream p;
  p.precision(17);
  p << "ground:" << config_.ground.s << "," << config_.ground.l << ","
    << config_.ground.r_seed << "," << config_.ground.k_nn << ","
    << config_.ground.alpha_deg << "," << config_.ground.delta;
  return io::hash_combine(inputs_hash(), io::hash_string(p.str()));
}

std::uint64_t Pipeline::doc_hash() const {
  std::ostringstream p;
  p.precision(17);
  p << "doc:" << config_.keyframes.d_fine << "," << config_.keyframes.R_fine << ","
    << config_.keyframes.d_coarse << "," << config_.keyframes.R_coarse << ","
    << config_.voting.dphi << "," << config_.voting.dtheta << ","
    << config_.voting.tau << "," << config_.voting.w;
  return io::hash_combine(ground_hash(), io::hash_string(p.str()));
}

std::uint64_t Pipeline::render_hash() const {
  std::ostringstream p;
  p.precision(17);
  const render::RenderParams& r = config_.render;
  p << "render:" << r.d_min << "," << r.d_max << "," << r.d_step << "," << r.d_crop
    << "," << r.sigma_min << "," << r.sigma_max << "," << r.sigma_min_dyn << ","
    << r.sigma_max_dyn << "," << r.elongation << ",png=" << config_.write_png
    << ",f32=" << config_.write_f32;
  std::uint64_t h = io::hash_combine(doc_hash(), io::hash_string(p.str()));
  h = io::hash_combine(h, io::hash_file(manifest_.camera_timestamps));
  h = io::hash_combine(h, io::hash_file(manifest_.rig));
  return h;
}

bool Pipeline::stage_fresh(const std::string& name, std::uint64_t hash,
                           const std::vector<fs::path>& outputs) const {
  if (!resume_) return false;
  fs::path stamp = manifest_.output_dir / "stages" / (name + ".stamp");
  std::ifstream in(stamp);
  if (!in) return false;
  std::string stored;
  in >> stored;
  std::ostringstream want;
  want << std::hex << hash;
  if (stored != want.str()) return false;
  for (const fs::path& out : outputs)
    if (!fs::exists(out)) return false;
  return true;
}

void Pipeline::write_stamp(const std::string& name, std::uint64_t hash) const {
  fs::path dir = manifest_.output_dir / "stages";
  fs::create_directories(dir);
  std::ofstream out(dir / (name + ".stamp"));
  out << std::hex << hash << "\n";
}

StageStatus Pipeline::run_ground() {
  StageStatus status{"ground"};
  status.items = manifest_.clouds.size();

  std::vector<fs::path> outputs;
  for (std::size_t i = 0; i < manifest_.clouds.size(); ++i)
    outputs.push_back(ground_labels_dir() / frame_name(static_cast<int>(i), ".label"));
  std::uint64_t hash = ground_hash();
  if (stage_fresh("ground", hash, outputs)) {
    status.skipped = true;
    log("[ground] cached, skipping");
    return status;
  }

  auto start = std::chrono::steady_clock::now();
  fs::create_directories(ground_labels_dir());

  auto chunks = ground::chunk_trajectory(trajectory_, config_.ground.l);
  for (auto [begin, end] : chunks) {
    std::vector<PointCloud> frames(end - begin);
    for (int f = begin; f < end; ++f)
      frames[f - begin] = io::read_cloud_bin(manifest_.clouds[f]);

    std::span<const PointCloud> frame_span(frames.data(), frames.size());
    std::span<const Pose> pose_span(trajectory_.poses().data() + begin, end - begin);
    std::vector<std::vector<std::uint8_t>> flags;
    try {
      flags = ground::segment_ground_chunk(frame_span, pose_span, config_.ground,
                                           config_.workers);
    } catch (const Error& e) {
      if (std::string(e.what()) != "no ground seeds") throw;
      log("[ground] warning: no ground seeds in chunk [" + std::to_string(begin) +
          ", " + std::to_string(end) + "), labeling all non-ground");
      flags.assign(frames.size(), {});
      for (std::size_t f = 0; f < frames.size(); ++f)
        flags[f].assign(frames[f].size(), 0);
    }

    for (int f = begin; f < end; ++f) {
      std::vector<PointLabel> labels(frames[f - begin].size(), PointLabel::Unlabeled);
      const auto& chunk_flags = flags[f - begin];
      for (std::size_t k = 0; k < labels.size(); ++k)
        if (chunk_flags[k]) labels[k] = PointLabel::Ground;
      io::write_labels(outputs[f], labels);
    }
  }

  write_stamp("ground", hash);
  status.seconds = seconds_since(start);
  std::ostringstream msg;
  msg << "[ground] " << status.items << " frames in " << std::fixed
      << std::setprecision(2) << status.seconds << " s ("
      << std::setprecision(4) << status.seconds_per_item() << " s/frame)";
  log(msg.str());
  return status;
}

StageStatus Pipeline::run_doc() {
  StageStatus status{"doc"};
  status.items = manifest_.clouds.size();

  std::vector<fs::path> outputs;
  for (std::size_t i = 0; i < manifest_.clouds.size(); ++i)
    outputs.push_back(label_path(static_cast<int>(i)));
  std::uint64_t hash = doc_hash();
  if (stage_fresh("doc", hash, outputs)) {
    status.skipped = true;
    log("[doc] cached, skipping");
    return status;
  }

  auto start = std::chrono::steady_clock::now();
  fs::create_directories(labels_dir());

  // Frames with ground flags attached; shared by queries and key images.
  CloudCache cache(
      [this](int index) {
        auto cloud = std::make_shared<PointCloud>(io::read_cloud_bin(manifest_.clouds[index]));
        auto labels = io::read_labels(ground_labels_dir() / frame_name(index, ".label"));
        if (labels.size() != cloud->size())
          throw Error("ground label count does not match cloud: frame " +
                      std::to_string(index));
        cloud->labels = std::move(labels);
        cloud->timestamp = trajectory_[index].timestamp;
        return cloud;
      },
      std::max<std::size_t>(config_.key_image_cache, 64));

  doc::KeyImageCache key_images([&cache](int index) { return cache.get(index); },
                                config_.voting, config_.key_image_cache);

  bool warned_no_keyframes = false;
  for (std::size_t i = 0; i < manifest_.clouds.size(); ++i) {
    std::shared_ptr<const PointCloud> frame = cache.get(static_cast<int>(i));
    bool no_keyframes = false;
    std::vector<PointLabel> labels =
        doc::classify_frame(*frame, static_cast<int>(i), trajectory_, key_images,
                            config_.keyframes, config_.voting, config_.workers,
                            &no_keyframes);
    if (no_keyframes && !warned_no_keyframes) {
      log("[doc] warning: no key frames available, non-ground points default to static");
      warned_no_keyframes = true;
    }
    io::write_labels(outputs[i], labels);
  }

  write_stamp("doc", hash);
  status.seconds = seconds_since(start);
  std::ostringstream msg;
  msg << "[doc] " << status.items << " frames in " << std::fixed
      << std::setprecision(2) << status.seconds << " s ("
      << std::setprecision(4) << status.seconds_per_item() << " s/frame)";
  log(msg.str());
  return status;
}

StageStatus Pipeline::run_render() {
  StageStatus status{"render"};
  std::vector<double> cam_times = io::read_timestamps(manifest_.camera_timestamps);
  status.items = cam_times.size();

  std::vector<fs::path> outputs;
  for (std::size_t i = 0; i < cam_times.size(); ++i) {
    if (config_.write_png) outputs.push_back(depth_png_path(static_cast<int>(i)));
    if (config_.write_f32) outputs.push_back(depth_f32_path(static_cast<int>(i)));
  }
  std::uint64_t hash = render_hash();
  if (stage_fresh("render", hash, outputs)) {
    status.skipped = true;
    log("[render] cached, skipping");
    return status;
  }

  auto start = std::chrono::steady_clock::now();
  CameraRig rig = io::load_rig(manifest_.rig);
  if (config_.write_png) fs::create_directories(depth_dir());
  if (config_.write_f32) fs::create_directories(depth_f32_dir());
  if (config_.write_preview) fs::create_directories(manifest_.output_dir / "preview");

  CloudCache cache(
      [this](int index) {
        auto cloud = std::make_shared<PointCloud>(io::read_cloud_bin(manifest_.clouds[index]));
        auto labels = io::read_labels(label_path(index));
        if (labels.size() != cloud->size())
          throw Error("label count does not match cloud: frame " + std::to_string(index));
        cloud->labels = std::move(labels);
        return cloud;
      },
      512);

  // Maps for different camera timestamps render fully in parallel; each map
  // is single-threaded and writes its own files.
  std::atomic<std::uint64_t> clamped_total{0};
  std::mutex density_mutex;
  double density_sum = 0.0;
  parallel_for(cam_times.size(), config_.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t ci = begin; ci < end; ++ci) {
      double t_cam = cam_times[ci];
      render::RenderSelection sel =
          render::select_render_frames(trajectory_, t_cam, config_.render);

      std::vector<std::shared_ptr<const PointCloud>> held;
      std::vector<render::FrameRef> static_frames;
      for (int k : sel.static_frames) {
        held.push_back(cache.get(k));
        static_frames.push_back({held.back().get(), trajectory_[k]});
      }
      auto dyn_cloud = cache.get(sel.dynamic_frame);
      render::FrameRef dynamic_frame{dyn_cloud.get(), trajectory_[sel.dynamic_frame]};

      Pose cam_pose = trajectory_.interpolate(t_cam);
      DepthMap map = render::render_depth(static_frames, dynamic_frame, cam_pose, rig,
                                          config_.render);
      {
        std::lock_guard lock(density_mutex);
        density_sum += map.density();
      }

      if (config_.write_png)
        clamped_total += static_cast<std::uint64_t>(
            io::write_depth_png(map, depth_png_path(static_cast<int>(ci))));
      if (config_.write_f32) io::write_depth_f32(map, depth_f32_path(static_cast<int>(ci)));
      if (config_.write_preview)
        io::write_depth_preview_png(map, manifest_.output_dir / "preview" /
                                             frame_name(static_cast<int>(ci), ".png"));
    }
  });

  write_stamp("render", hash);
  status.seconds = seconds_since(start);
  std::ostringstream msg;
  msg << "[render] " << status.items << " maps in " << std::fixed
      << std::setprecision(2) << status.seconds << " s ("
      << std::setprecision(4) << status.seconds_per_item() << " s/map), mean density "
      << std::setprecision(3)
      << (status.items > 0 ? density_sum / static_cast<double>(status.items) : 0.0);
  if (clamped_total.load() > 0)
    msg << ", " << clamped_total.load() << " depths clamped to the png range";
  log(msg.str());
  return status;
}

std::vector<StageStatus> Pipeline::run_annotate() {
  return {run_ground(), run_doc(), run_render()};
}

}  // namespace densedepth
