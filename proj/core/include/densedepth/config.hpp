#pragma once

#include <filesystem>
#include <string>

#include "densedepth/doc.hpp"
#include "densedepth/ground.hpp"
#include "densedepth/render.hpp"

namespace densedepth {

/// Every tunable of the pipeline in one place. Defaults are the parameter
/// set the stages were tuned with; a config file overrides fields
/// selectively and unknown keys are rejected outright so typos cannot
/// silently corrupt a dataset run.
struct PipelineConfig {
  ground::GroundParams ground;
  doc::KeyFrameParams keyframes;
  doc::VotingParams voting;
  render::RenderParams render;

  int workers = 0;        // 0 = hardware concurrency
  std::uint64_t seed = 1;
  std::size_t key_image_cache = 128;

  bool write_png = true;
  bool write_f32 = false;
  bool write_preview = false;

  void validate() const {
    ground.validate();
    keyframes.validate();
    voting.validate();
    render.validate();
    if (workers < 0) throw Error("workers must be >= 0");
  }

  /// Stable fingerprint of the stage-relevant parameters.
  std::string canonical_string() const;
};

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

}  // namespace densedepth
