#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "forgery/data_manifest.hpp"
#include "forgery/face_extract.hpp"
#include "forgery/image.hpp"

namespace forgery {

enum class FakeArtifact { checkerboard, boundary_seam, none };

std::string_view to_string(FakeArtifact artifact);
FakeArtifact parse_artifact(std::string_view name);

struct SyntheticSpec {
  int n_videos = 32;
  int frames_per_video = 30;
  int image_size = 128;
  FakeArtifact fake_artifact = FakeArtifact::checkerboard;
  std::uint64_t seed = 0;
  /// Per class, this fraction of videos (rounded down) goes to the test split.
  double holdout_fraction = 0.5;
  double artifact_amplitude = 0.08;
  /// Scales how much colours, texture and face geometry vary between videos (0: every
  /// video shares one look, 1: wide variation).
  double appearance_jitter = 1.0;

  /// Throws std::invalid_argument unless n_videos >= 2, frames_per_video >= 1, the image is
  /// at least 32 px, and holdout_fraction lies in [0, 1).
  void validate() const;
};

/// Paths inside a generated corpus directory.
struct CorpusLayout {
  std::filesystem::path root;

  std::filesystem::path manifest() const { return root / "manifest.jsonl"; }
  std::filesystem::path truth() const { return root / "truth.jsonl"; }
  std::filesystem::path video_dir(const std::string& id) const { return root / "videos" / id; }
  std::filesystem::path bbox_file(const std::string& id) const { return root / "bboxes" / (id + ".txt"); }
};

/// Ground-truth detector file for a manifest entry: `<manifest dir>/bboxes/<video_id>.txt`.
std::filesystem::path bbox_fixture_for(const std::filesystem::path& manifest_path, const std::string& video_id);

/// One frame of a synthetic video plus its face box. Pure function of its arguments.
struct SyntheticFrame {
  Image image;
  BBox face;
};
SyntheticFrame render_synthetic_frame(const SyntheticSpec& spec, int video_index, bool fake, int frame_index);

/// Writes videos (frame directories), bbox fixtures, manifest.jsonl and truth.jsonl under
/// `out_dir`. Odd-numbered videos are fake and share their look (colours, geometry, motion)
/// with the preceding real video. Deterministic in `spec`.
std::vector<ManifestEntry> generate_corpus(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace forgery
