#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forgery/perturb.hpp"
#include "forgery/scoring.hpp"
#include "forgery/training.hpp"

namespace forgery {

struct RunPaths {
  std::filesystem::path manifest;
  std::filesystem::path checkpoint;
  std::filesystem::path output;
  std::filesystem::path truth;

  bool operator==(const RunPaths&) const = default;
};

/// Everything one run needs. The variant presets fill every field; a config file only has
/// to name what differs.
struct RunConfig {
  PipelineConfig pipeline;
  TrainConfig train;
  /// Attention stage of the dual-branch variant.
  TrainConfig stage2;
  AugmentPolicy augment;
  /// Image backbones (toy-b0/b1/b2); the champion variant ensembles all of them.
  std::vector<std::string> backbones;
  int attention_hidden = 0;  // 0 means d/2
  RunPaths paths;
  std::optional<std::uint64_t> seed;

  bool operator==(const RunConfig&) const = default;
};

RunConfig default_run_config(PipelineVariant variant);

/// Throws std::invalid_argument when any section fails its own validation.
void validate(const RunConfig& cfg);

/// JSON text. Reading starts from the preset named by `pipeline.variant` (champion when
/// absent) and overlays the keys present; unknown keys are ParseErrors. Relative paths in
/// the file resolve against `base_dir`.
std::string format_run_config(const RunConfig& cfg);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const std::filesystem::path& path, const RunConfig& cfg);

}  // namespace forgery
