#include <gtest/gtest.h>

#include <fstream>
#include <iterator>

#include "forgery/challenge_eval.hpp"
#include "forgery/data_manifest.hpp"
#include "forgery/face_extract.hpp"
#include "forgery/fixtures.hpp"
#include "forgery/video_ingest.hpp"
#include "test_support.hpp"

using namespace forgery;
using forgery::testing::TempDir;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.n_videos = 6;
  s.frames_per_video = 4;
  s.image_size = 48;
  s.seed = 3;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<float> px(const Image& img) { return {img.pixels().begin(), img.pixels().end()}; }

double mean_abs_diff(const Image& a, const Image& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) s += std::abs(a.pixels()[i] - b.pixels()[i]);
  return s / a.pixels().size();
}

}  // namespace

TEST(Fixtures, SpecValidation) {
  SyntheticSpec s = small_spec();
  EXPECT_NO_THROW(s.validate());
  s.n_videos = 1;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = small_spec();
  s.image_size = 16;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = small_spec();
  s.holdout_fraction = 1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = small_spec();
  s.appearance_jitter = 1.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  for (FakeArtifact a : {FakeArtifact::checkerboard, FakeArtifact::boundary_seam, FakeArtifact::none})
    EXPECT_EQ(parse_artifact(to_string(a)), a);
  EXPECT_THROW(parse_artifact("moire"), std::invalid_argument);
}

TEST(Fixtures, RenderingIsDeterministicAndInRange) {
  const SyntheticSpec s = small_spec();
  const auto a = render_synthetic_frame(s, 2, false, 1);
  const auto b = render_synthetic_frame(s, 2, false, 1);
  EXPECT_EQ(px(a.image), px(b.image));
  EXPECT_EQ(a.face, b.face);
  for (float v : a.image.pixels()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_GE(a.face.x, 0);
  EXPECT_GE(a.face.y, 0);
  EXPECT_LE(a.face.x + a.face.w, s.image_size);
  EXPECT_LE(a.face.y + a.face.h, s.image_size);
}

TEST(Fixtures, PairsShareTheirLookAndDifferByArtifact) {
  const SyntheticSpec s = small_spec();
  const auto real = render_synthetic_frame(s, 2, false, 0);
  const auto fake = render_synthetic_frame(s, 3, true, 0);
  const auto other = render_synthetic_frame(s, 4, false, 0);
  EXPECT_EQ(real.face, fake.face);
  EXPECT_LT(mean_abs_diff(real.image, fake.image), mean_abs_diff(real.image, other.image));

  SyntheticSpec null_spec = s;
  null_spec.fake_artifact = FakeArtifact::none;
  const auto null_fake = render_synthetic_frame(null_spec, 3, true, 0);
  const auto null_real = render_synthetic_frame(null_spec, 3, false, 0);
  EXPECT_EQ(px(null_fake.image), px(null_real.image));
  EXPECT_NE(px(fake.image), px(render_synthetic_frame(s, 3, false, 0).image));
}

TEST(Fixtures, CorpusIsByteIdenticalAcrossRuns) {
  TempDir a("corpus"), b("corpus");
  const auto ea = generate_corpus(small_spec(), a.path());
  generate_corpus(small_spec(), b.path());
  ASSERT_EQ(ea.size(), 6u);
  for (const auto& e : ea) {
    const auto rel = std::filesystem::relative(e.path, a.path());
    for (int f = 0; f < 4; ++f)
      EXPECT_EQ(slurp(FrameDirectoryDecoder::frame_path(e.path, f)),
                slurp(FrameDirectoryDecoder::frame_path(b.path() / rel, f)));
  }
  EXPECT_EQ(slurp(a / "manifest.jsonl"), slurp(b / "manifest.jsonl"));
  EXPECT_EQ(slurp(a / "truth.jsonl"), slurp(b / "truth.jsonl"));
}

TEST(Fixtures, CorpusLoadsThroughThePipelineInputs) {
  TempDir tmp("corpus");
  SyntheticSpec s = small_spec();
  s.n_videos = 8;
  generate_corpus(s, tmp.path());
  const CorpusLayout layout{tmp.path()};
  const auto manifest = load_manifest(layout.manifest());
  ASSERT_EQ(manifest.size(), 8u);
  const auto truth = read_ground_truth(layout.truth());
  EXPECT_EQ(truth.size(), 8u);
  int fakes = 0, test_split = 0;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& e = manifest[i];
    EXPECT_EQ(e.label, static_cast<int>(i % 2));
    EXPECT_EQ(truth.labels.at(e.video_id), e.label);
    EXPECT_EQ(e.source, "synthetic");
    fakes += e.label;
    test_split += e.split == Split::test;
    const VideoRef ref = open_video(e.path);
    EXPECT_EQ(ref.frame_count, 4u);
    const auto boxes = read_bbox_fixture(bbox_fixture_for(layout.manifest(), e.video_id));
    EXPECT_EQ(boxes.size(), 4u);
    const auto frame = decode_frames(ref, std::vector<FrameIndex>{0}).frames.front();
    EXPECT_EQ(frame.width(), s.image_size);
    for (const auto& [idx, dets] : boxes) {
      ASSERT_EQ(dets.size(), 1u);
      const BBox& b = dets.front().box;
      EXPECT_GE(b.x, 0);
      EXPECT_GE(b.y, 0);
      EXPECT_LE(b.x + b.w, frame.width());
      EXPECT_LE(b.y + b.h, frame.height());
    }
  }
  EXPECT_EQ(fakes, 4);
  EXPECT_EQ(test_split, 4);
  const auto test = filter_split(manifest, Split::test);
  EXPECT_EQ(std::count_if(test.begin(), test.end(), [](const auto& e) { return e.label == 1; }), 2);
}
