#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "forgery/image.hpp"

namespace forgery {

using FrameIndex = std::size_t;

struct Rational {
  int num = 25;
  int den = 1;
};

struct VideoRef {
  std::filesystem::path path;
  std::size_t frame_count = 0;
  Rational fps;  // informational only
};

/// Decoded frames in temporal order; source_indices is strictly increasing.
struct FrameBatch {
  std::vector<Image> frames;
  std::vector<FrameIndex> source_indices;
};

/// Equal-interval frame selection: floor(i * total_frames / n) for i in [0, n).
/// Short videos (0 < total_frames < n) yield every frame; empty videos yield nothing.
std::vector<FrameIndex> sample_frame_indices(std::size_t total_frames, std::size_t n);

/// Source of decoded frames for one storage layout.
class DecoderBackend {
 public:
  virtual ~DecoderBackend() = default;
  virtual bool can_open(const std::filesystem::path& path) const = 0;
  virtual VideoRef probe(const std::filesystem::path& path) const = 0;
  /// Indices are already validated (in range, strictly increasing).
  virtual std::vector<Image> read(const VideoRef& video, std::span<const FrameIndex> indices) const = 0;
};

/// A directory of frame_NNNNN.png files (the fixture layout). An optional meta.json
/// carries {"fps": [num, den]}.
class FrameDirectoryDecoder final : public DecoderBackend {
 public:
  bool can_open(const std::filesystem::path& path) const override;
  VideoRef probe(const std::filesystem::path& path) const override;
  std::vector<Image> read(const VideoRef& video, std::span<const FrameIndex> indices) const override;

  static std::filesystem::path frame_path(const std::filesystem::path& dir, FrameIndex index);
};

/// Container formats through OpenCV's VideoCapture.
class OpenCvVideoDecoder final : public DecoderBackend {
 public:
  bool can_open(const std::filesystem::path& path) const override;
  VideoRef probe(const std::filesystem::path& path) const override;
  std::vector<Image> read(const VideoRef& video, std::span<const FrameIndex> indices) const override;
};

/// Picks the backend that understands `path` (frame directory first, then containers).
const DecoderBackend& decoder_for(const std::filesystem::path& path);

VideoRef open_video(const std::filesystem::path& path);

/// Throws std::invalid_argument for out-of-range or non-increasing indices, IoError when
/// the media cannot be read.
FrameBatch decode_frames(const VideoRef& video, std::span<const FrameIndex> indices);
FrameBatch decode_frames(const VideoRef& video, std::span<const FrameIndex> indices, const DecoderBackend& backend);

}  // namespace forgery
