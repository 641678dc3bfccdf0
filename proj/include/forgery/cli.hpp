#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "forgery/checkpoint.hpp"
#include "forgery/config.hpp"
#include "forgery/data_manifest.hpp"
#include "forgery/face_extract.hpp"
#include "forgery/scoring.hpp"

namespace forgery {

/// Fixture-backed detector for a manifest entry (`bboxes/<video_id>.txt` beside the
/// manifest). Throws IoError when the file is missing.
std::shared_ptr<const DetectorBackend> detector_for(const std::filesystem::path& manifest_path,
                                                    const ManifestEntry& entry);

/// Samples n_frames, decodes, detects and crops. With a cache directory, crops are stored
/// as exact float data keyed by the video path and extraction parameters.
FaceSequence extract_entry_faces(const ManifestEntry& entry, const DetectorBackend& detector, std::size_t n_frames,
                                 double crop_factor, int out_size,
                                 const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

/// Directory named by FORGERY_KIT_CACHE, if set and nonempty.
std::optional<std::filesystem::path> face_cache_from_env();

/// Trains every model the variant needs on the class-balanced train split and returns
/// them in one checkpoint (metadata records the variant and the full run config).
Checkpoint train_pipeline(const RunConfig& cfg, const std::filesystem::path& manifest_path, std::uint64_t seed,
                          std::ostream* log = nullptr);

/// Rebuilds the models stored by train_pipeline. The checkpoint variant must match.
PipelineModels load_pipeline_models(const Checkpoint& ckpt, PipelineVariant variant);

/// Entry point of the forgery_kit executable. Returns the process exit code; failures
/// print one line to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace forgery
