#include "forgery/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "forgery/challenge_eval.hpp"
#include "forgery/errors.hpp"
#include "forgery/rng.hpp"
#include "forgery/video_ingest.hpp"

namespace forgery {

namespace fs = std::filesystem;

std::string_view to_string(FakeArtifact artifact) {
  switch (artifact) {
    case FakeArtifact::checkerboard: return "checkerboard";
    case FakeArtifact::boundary_seam: return "boundary_seam";
    case FakeArtifact::none: return "none";
  }
  throw std::invalid_argument("unknown artifact");
}

FakeArtifact parse_artifact(std::string_view name) {
  for (auto a : {FakeArtifact::checkerboard, FakeArtifact::boundary_seam, FakeArtifact::none})
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown fake artifact: " + std::string(name));
}

void SyntheticSpec::validate() const {
  if (n_videos < 2) throw std::invalid_argument("need at least two videos (one per class)");
  if (frames_per_video < 1) throw std::invalid_argument("frames_per_video must be at least 1");
  if (image_size < 32) throw std::invalid_argument("image_size must be at least 32");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw std::invalid_argument("holdout_fraction must be in [0,1)");
  if (artifact_amplitude < 0) throw std::invalid_argument("artifact_amplitude must be nonnegative");
  if (!(appearance_jitter >= 0.0 && appearance_jitter <= 1.0))
    throw std::invalid_argument("appearance_jitter must be in [0,1]");
}

fs::path bbox_fixture_for(const fs::path& manifest_path, const std::string& video_id) {
  return manifest_path.parent_path() / "bboxes" / (video_id + ".txt");
}

namespace {

// Per-video appearance, drawn once from the video's seed.
struct Look {
  float bg_a[3], bg_b[3];
  double tex_freq, tex_phase, tex_amp;
  double cx, cy, ax, ay;  // ellipse centre and semi-axes as fractions of the frame
  float skin[3];
  double drift_phase, drift_amp;
};

// Videos 2k (real) and 2k+1 (fake) share one source look, the way a face swap keeps the
// target video's person, background and motion.
Look draw_look(const SyntheticSpec& spec, int video_index) {
  Rng rng = Rng(spec.seed).split(static_cast<std::uint64_t>(video_index / 2));
  // Every range is centred on its midpoint and narrowed by the jitter.
  auto draw = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo) * spec.appearance_jitter;
    return rng.uniform(mid - half, mid + half);
  };
  Look l{};
  for (int c = 0; c < 3; ++c) {
    l.bg_a[c] = static_cast<float>(draw(0.1, 0.9));
    l.bg_b[c] = static_cast<float>(draw(0.1, 0.9));
  }
  l.tex_freq = draw(2.0, 6.0);
  l.tex_phase = rng.uniform(0.0, 2 * std::numbers::pi);
  l.tex_amp = draw(0.02, 0.08);
  l.cx = draw(0.4, 0.6);
  l.cy = draw(0.4, 0.6);
  l.ax = draw(0.16, 0.22);
  l.ay = l.ax * draw(1.2, 1.35);
  const double tone = draw(0.35, 0.85);
  l.skin[0] = static_cast<float>(std::min(1.0, tone + 0.12));
  l.skin[1] = static_cast<float>(tone * 0.82);
  l.skin[2] = static_cast<float>(tone * 0.68);
  l.drift_phase = rng.uniform(0.0, 2 * std::numbers::pi);
  l.drift_amp = rng.uniform(0.5, 2.5);
  return l;
}

}  // namespace

SyntheticFrame render_synthetic_frame(const SyntheticSpec& spec, int video_index, bool fake, int frame_index) {
  const Look l = draw_look(spec, video_index);
  const int s = spec.image_size;
  const double t = frame_index * 0.2 + l.drift_phase;
  const double cx = l.cx * s + l.drift_amp * std::sin(t);
  const double cy = l.cy * s + l.drift_amp * std::cos(0.7 * t);
  const double ax = l.ax * s;
  const double ay = l.ay * s;

  Rng noise = Rng(spec.seed).split(1u << 20).split(static_cast<std::uint64_t>(video_index)).split(frame_index);
  Image img(s, s);
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      const double u = static_cast<double>(x) / s;
      const double v = static_cast<double>(y) / s;
      const double tex = l.tex_amp * std::sin(l.tex_freq * 2 * std::numbers::pi * (u + 0.5 * v) + l.tex_phase);
      const double dx = (x + 0.5 - cx) / ax;
      const double dy = (y + 0.5 - cy) / ay;
      const double r = std::sqrt(dx * dx + dy * dy);
      for (int c = 0; c < 3; ++c) {
        double val = (1 - v) * l.bg_a[c] + v * l.bg_b[c] + tex;
        if (r <= 1.0) {
          // Skin with soft shading toward the rim.
          val = l.skin[c] * (1.0 - 0.25 * r * r);
          // Eyes and mouth.
          const double ex = std::abs(dx) - 0.38;
          const double ey = dy + 0.25;
          if (ex * ex / 0.018 + ey * ey / 0.006 <= 1.0) val *= 0.25;
          if (std::abs(dx) < 0.32 && std::abs(dy - 0.45) < 0.05) val *= 0.45;
          if (fake && r <= 0.9 && spec.fake_artifact == FakeArtifact::checkerboard) {
            const int cell = ((x / 2) + (y / 2)) % 2;
            val += cell ? spec.artifact_amplitude : -spec.artifact_amplitude;
          }
        }
        if (fake && spec.fake_artifact == FakeArtifact::boundary_seam && r > 0.88 && r <= 1.04)
          val += (c == 0 ? 2.0 : -1.0) * spec.artifact_amplitude;
        val += noise.normal(0.0, 0.01);
        img.at(y, x, c) = static_cast<float>(std::clamp(val, 0.0, 1.0));
      }
    }
  }
  const double x0 = std::max(0.0, cx - ax);
  const double y0 = std::max(0.0, cy - ay);
  const double x1 = std::min(static_cast<double>(s), cx + ax);
  const double y1 = std::min(static_cast<double>(s), cy + ay);
  return {std::move(img), {x0, y0, x1 - x0, y1 - y0}};
}

std::vector<ManifestEntry> generate_corpus(const SyntheticSpec& spec, const fs::path& out_dir) {
  spec.validate();
  const CorpusLayout layout{out_dir};
  std::error_code ec;
  fs::create_directories(out_dir / "videos", ec);
  fs::create_directories(out_dir / "bboxes", ec);
  if (ec) throw IoError("cannot create corpus directory " + out_dir.string() + ": " + ec.message());

  // Class-wise split: the first (1 - holdout) share of each class trains.
  const int n_fake = spec.n_videos / 2;
  const int n_real = spec.n_videos - n_fake;
  const int real_train = n_real - static_cast<int>(std::floor(n_real * spec.holdout_fraction));
  const int fake_train = n_fake - static_cast<int>(std::floor(n_fake * spec.holdout_fraction));

  std::vector<ManifestEntry> entries;
  GroundTruthSet truth;
  for (int i = 0; i < spec.n_videos; ++i) {
    const bool fake = i % 2 == 1;
    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "syn%04d", i);
    const std::string id = id_buf;
    const fs::path dir = layout.video_dir(id);
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());

    BBoxTable boxes;
    for (int f = 0; f < spec.frames_per_video; ++f) {
      SyntheticFrame frame = render_synthetic_frame(spec, i, fake, f);
      save_png(frame.image, FrameDirectoryDecoder::frame_path(dir, static_cast<FrameIndex>(f)));
      boxes[static_cast<FrameIndex>(f)].push_back({frame.face, 0.99});
    }
    {
      std::ofstream meta(dir / "meta.json");
      meta << "{\"fps\": [25, 1]}\n";
      if (!meta) throw IoError("cannot write " + (dir / "meta.json").string());
    }
    write_bbox_fixture(layout.bbox_file(id), boxes);

    const int class_rank = i / 2;
    const bool train = class_rank < (fake ? fake_train : real_train);
    entries.push_back({id, fs::path("videos") / id, fake ? 1 : 0, train ? Split::train : Split::test, "synthetic"});
    truth.labels[id] = fake ? 1 : 0;
  }
  write_manifest(layout.manifest(), entries);
  write_ground_truth(layout.truth(), truth);
  for (auto& e : entries) e.path = out_dir / e.path;
  return entries;
}

}  // namespace forgery
