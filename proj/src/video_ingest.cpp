#include "forgery/video_ingest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>
#include <opencv2/videoio.hpp>

#include "forgery/errors.hpp"

namespace forgery {

namespace fs = std::filesystem;

std::vector<FrameIndex> sample_frame_indices(std::size_t total_frames, std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample_frame_indices: n must be at least 1");
  std::vector<FrameIndex> indices;
  if (total_frames == 0) return indices;
  if (total_frames < n) {
    indices.resize(total_frames);
    for (std::size_t i = 0; i < total_frames; ++i) indices[i] = i;
    return indices;
  }
  indices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) indices.push_back(i * total_frames / n);
  return indices;
}

// ---- frame directories ----

fs::path FrameDirectoryDecoder::frame_path(const fs::path& dir, FrameIndex index) {
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%05zu.png", index);
  return dir / name;
}

bool FrameDirectoryDecoder::can_open(const fs::path& path) const {
  std::error_code ec;
  return fs::is_directory(path, ec);
}

VideoRef FrameDirectoryDecoder::probe(const fs::path& path) const {
  if (!can_open(path)) throw IoError("not a frame directory: " + path.string());
  VideoRef ref;
  ref.path = path;
  // Frames are contiguous from 0; the count stops at the first gap.
  while (fs::exists(frame_path(path, ref.frame_count))) ++ref.frame_count;

  const fs::path meta = path / "meta.json";
  if (fs::exists(meta)) {
    std::ifstream in(meta);
    try {
      const auto j = nlohmann::json::parse(in);
      if (j.contains("fps")) {
        ref.fps.num = j["fps"].at(0).get<int>();
        ref.fps.den = j["fps"].at(1).get<int>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw IoError("bad meta.json in " + path.string() + ": " + e.what());
    }
    if (ref.fps.num <= 0 || ref.fps.den <= 0) throw IoError("fps must be positive in " + meta.string());
  }
  return ref;
}

std::vector<Image> FrameDirectoryDecoder::read(const VideoRef& video, std::span<const FrameIndex> indices) const {
  std::vector<Image> frames;
  frames.reserve(indices.size());
  for (FrameIndex idx : indices) frames.push_back(load_image(frame_path(video.path, idx)));
  return frames;
}

// ---- containers ----

bool OpenCvVideoDecoder::can_open(const fs::path& path) const {
  std::error_code ec;
  return fs::is_regular_file(path, ec);
}

VideoRef OpenCvVideoDecoder::probe(const fs::path& path) const {
  cv::VideoCapture cap(path.string());
  if (!cap.isOpened()) throw IoError("cannot open video: " + path.string());
  VideoRef ref;
  ref.path = path;
  const double count = cap.get(cv::CAP_PROP_FRAME_COUNT);
  ref.frame_count = count > 0 ? static_cast<std::size_t>(count) : 0;
  const double fps = cap.get(cv::CAP_PROP_FPS);
  if (fps > 0) {
    ref.fps.num = static_cast<int>(fps * 1000.0 + 0.5);
    ref.fps.den = 1000;
  }
  return ref;
}

std::vector<Image> OpenCvVideoDecoder::read(const VideoRef& video, std::span<const FrameIndex> indices) const {
  cv::VideoCapture cap(video.path.string());
  if (!cap.isOpened()) throw IoError("cannot open video: " + video.path.string());
  std::vector<Image> frames;
  frames.reserve(indices.size());
  // Sequential grab is frame-accurate for every codec; seeking is not.
  FrameIndex pos = 0;
  cv::Mat mat;
  for (FrameIndex want : indices) {
    while (pos < want) {
      if (!cap.grab()) throw IoError("video ended early: " + video.path.string());
      ++pos;
    }
    if (!cap.read(mat) || mat.empty())
      throw IoError("cannot decode frame " + std::to_string(want) + " of " + video.path.string());
    ++pos;
    Image img(mat.rows, mat.cols);
    for (int y = 0; y < mat.rows; ++y) {
      const auto* row = mat.ptr<cv::Vec3b>(y);
      for (int x = 0; x < mat.cols; ++x)
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = row[x][2 - c] / 255.0f;
    }
    frames.push_back(std::move(img));
  }
  return frames;
}

const DecoderBackend& decoder_for(const fs::path& path) {
  static const FrameDirectoryDecoder directory;
  static const OpenCvVideoDecoder container;
  if (directory.can_open(path)) return directory;
  if (container.can_open(path)) return container;
  throw IoError("no decoder for: " + path.string());
}

VideoRef open_video(const fs::path& path) { return decoder_for(path).probe(path); }

FrameBatch decode_frames(const VideoRef& video, std::span<const FrameIndex> indices) {
  return decode_frames(video, indices, decoder_for(video.path));
}

FrameBatch decode_frames(const VideoRef& video, std::span<const FrameIndex> indices, const DecoderBackend& backend) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= video.frame_count)
      throw std::invalid_argument("frame index " + std::to_string(indices[i]) + " out of range for " +
                                  std::to_string(video.frame_count) + "-frame video");
    if (i > 0 && indices[i] <= indices[i - 1])
      throw std::invalid_argument("frame indices must be strictly increasing");
  }
  FrameBatch batch;
  batch.frames = backend.read(video, indices);
  batch.source_indices.assign(indices.begin(), indices.end());
  return batch;
}

}  // namespace forgery
