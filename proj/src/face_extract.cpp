#include "forgery/face_extract.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "forgery/errors.hpp"

namespace forgery {

std::vector<Image> FaceSequence::images() const {
  std::vector<Image> out;
  out.reserve(crops.size());
  for (const auto& c : crops) out.push_back(c.image);
  return out;
}

BBoxTable read_bbox_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open bbox fixture: " + path.string());
  BBoxTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long index = -1;
    Detection d;
    if (!(fields >> index >> d.box.x >> d.box.y >> d.box.w >> d.box.h >> d.confidence) || index < 0)
      throw ParseError("expected `frame_index x y w h confidence` in " + path.string(), lineno);
    std::string trailing;
    if (fields >> trailing) throw ParseError("unexpected trailing field in " + path.string(), lineno);
    if (d.box.w <= 0 || d.box.h <= 0) throw ParseError("bbox extents must be positive", lineno);
    table[static_cast<FrameIndex>(index)].push_back(d);
  }
  return table;
}

void write_bbox_fixture(const std::filesystem::path& path, const BBoxTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write bbox fixture: " + path.string());
  char buf[160];
  for (const auto& [index, dets] : table)
    for (const auto& d : dets) {
      std::snprintf(buf, sizeof(buf), "%zu %.3f %.3f %.3f %.3f %.4f\n", index, d.box.x, d.box.y, d.box.w, d.box.h,
                    d.confidence);
      out << buf;
    }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Detection> FixtureDetector::detect(const Image& frame, FrameIndex index) const {
  auto it = table_.find(index);
  if (it == table_.end()) return {};
  std::vector<Detection> out;
  const double fw = frame.width();
  const double fh = frame.height();
  for (Detection d : it->second) {
    const double x0 = std::clamp(d.box.x, 0.0, fw);
    const double y0 = std::clamp(d.box.y, 0.0, fh);
    const double x1 = std::clamp(d.box.x + d.box.w, 0.0, fw);
    const double y1 = std::clamp(d.box.y + d.box.h, 0.0, fh);
    if (x1 <= x0 || y1 <= y0) continue;
    d.box = {x0, y0, x1 - x0, y1 - y0};
    out.push_back(d);
  }
  return out;
}

BBox expand_bbox(const BBox& box, double factor, int frame_w, int frame_h) {
  if (box.w <= 0 || box.h <= 0) throw std::invalid_argument("expand_bbox: degenerate box");
  if (!(factor >= 1.0)) throw std::invalid_argument("expand_bbox: factor must be >= 1");
  if (frame_w <= 0 || frame_h <= 0) throw std::invalid_argument("expand_bbox: frame must be nonempty");

  const double cx = box.x + box.w / 2.0;
  const double cy = box.y + box.h / 2.0;
  const double w = box.w * factor;
  const double h = box.h * factor;
  const double x0 = std::max(0.0, cx - w / 2.0);
  const double y0 = std::max(0.0, cy - h / 2.0);
  const double x1 = std::min(static_cast<double>(frame_w), cx + w / 2.0);
  const double y1 = std::min(static_cast<double>(frame_h), cy + h / 2.0);
  if (x1 <= x0 || y1 <= y0) throw std::invalid_argument("expand_bbox: box lies outside the frame");
  return {x0, y0, x1 - x0, y1 - y0};
}

const Detection* select_primary(const std::vector<Detection>& detections) {
  const Detection* best = nullptr;
  for (const auto& d : detections) {
    if (!best || d.confidence > best->confidence ||
        (d.confidence == best->confidence && d.box.area() > best->box.area()))
      best = &d;
  }
  return best;
}

FaceCrop crop_face(const Image& frame, const BBox& box, FrameIndex index, int out_size) {
  if (out_size <= 0) throw std::invalid_argument("crop_face: out_size must be positive");
  return {crop_resize(frame, box.x, box.y, box.w, box.h, out_size, out_size), box, index};
}

FaceSequence extract_face_sequence(const FrameBatch& frames, const DetectorBackend& detector, double factor,
                                   int out_size, std::string video_id) {
  if (out_size <= 0) throw std::invalid_argument("extract_face_sequence: out_size must be positive");
  if (frames.frames.size() != frames.source_indices.size())
    throw std::invalid_argument("extract_face_sequence: frames and indices differ in length");
  FaceSequence seq;
  seq.video_id = std::move(video_id);
  for (std::size_t i = 0; i < frames.frames.size(); ++i) {
    const Image& frame = frames.frames[i];
    const auto detections = detector.detect(frame, frames.source_indices[i]);
    const Detection* primary = select_primary(detections);
    if (!primary) continue;
    const BBox box = expand_bbox(primary->box, factor, frame.width(), frame.height());
    seq.crops.push_back(crop_face(frame, box, frames.source_indices[i], out_size));
  }
  return seq;
}

}  // namespace forgery
