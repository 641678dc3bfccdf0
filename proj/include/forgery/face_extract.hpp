#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forgery/image.hpp"
#include "forgery/video_ingest.hpp"

namespace forgery {

/// Axis-aligned box in pixel units, top-left anchored.
struct BBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double area() const { return w * h; }
  bool operator==(const BBox&) const = default;
};

struct Detection {
  BBox box;
  double confidence = 0;
};

struct FaceCrop {
  Image image;  // out_size × out_size
  BBox src_bbox;
  FrameIndex frame_index = 0;
};

struct FaceSequence {
  std::string video_id;
  std::vector<FaceCrop> crops;  // ordered by frame_index; empty for faceless videos

  std::vector<Image> images() const;
};

/// Face detector. The frame index lets fixture-driven detectors look up recorded boxes;
/// image-based detectors ignore it. Returned boxes lie within the frame.
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::vector<Detection> detect(const Image& frame, FrameIndex index) const = 0;
};

using BBoxTable = std::map<FrameIndex, std::vector<Detection>>;

/// Parses `frame_index x y w h confidence` lines. Blank lines and `#` comments are skipped.
BBoxTable read_bbox_fixture(const std::filesystem::path& path);
void write_bbox_fixture(const std::filesystem::path& path, const BBoxTable& table);

/// Replays recorded boxes, clipped to the frame.
class FixtureDetector final : public DetectorBackend {
 public:
  explicit FixtureDetector(BBoxTable table) : table_(std::move(table)) {}
  static FixtureDetector load(const std::filesystem::path& path) { return FixtureDetector(read_bbox_fixture(path)); }

  std::vector<Detection> detect(const Image& frame, FrameIndex index) const override;

 private:
  BBoxTable table_;
};

/// Scales width and height by `factor` about the box center, then clamps to
/// [0, frame_w] × [0, frame_h].
BBox expand_bbox(const BBox& box, double factor, int frame_w, int frame_h);

/// Highest confidence wins; larger area breaks ties; earlier detection breaks exact ties.
const Detection* select_primary(const std::vector<Detection>& detections);

FaceCrop crop_face(const Image& frame, const BBox& box, FrameIndex index, int out_size);

/// Per frame: pick the primary detection, expand it, crop, resize to out_size².
/// Frames without a detection are skipped.
FaceSequence extract_face_sequence(const FrameBatch& frames, const DetectorBackend& detector, double factor,
                                   int out_size, std::string video_id = {});

}  // namespace forgery
