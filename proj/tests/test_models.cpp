#include <gtest/gtest.h>

#include "forgery/losses.hpp"
#include "forgery/models.hpp"
#include "test_support.hpp"

using namespace forgery;
using forgery::testing::random_image;

TEST(BackboneSpec, PresetsAndValidation) {
  EXPECT_EQ(toy_backbone("toy-b1", 224).widths, (std::vector<int>{8, 16, 48}));
  EXPECT_THROW(toy_backbone("resnet", 224), std::invalid_argument);
  EXPECT_THROW(toy_backbone("toy-b0", 100), std::invalid_argument);
  BackboneSpec s;
  s.feature_dim = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(ImageClassifier, ProbabilitiesInRangeAndPure) {
  const ImageClassifier model(toy_backbone("toy-b0", 112), 3);
  EXPECT_EQ(model.features(random_image(112, 112, 1)).size(), 64u);
  const Image a = random_image(112, 112, 1);
  const Image b = random_image(112, 112, 2);
  const std::vector<Image> batch{a, b, a};
  const auto p = model.predict(batch);
  ASSERT_EQ(p.size(), 3u);
  for (double v : p) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(p[0], p[2]);
  EXPECT_THROW(model.score(random_image(64, 64, 1)), std::invalid_argument);
}

TEST(ImageClassifier, SeedDeterminesInitialization) {
  const ImageClassifier a(toy_backbone("toy-b0", 112), 5);
  const ImageClassifier b(toy_backbone("toy-b0", 112), 5);
  const ImageClassifier c(toy_backbone("toy-b0", 112), 6);
  EXPECT_EQ(a.parameters(), b.parameters());
  EXPECT_NE(a.parameters(), c.parameters());
}

TEST(ImageClassifier, GradientMatchesFiniteDifferences) {
  Rng rng(9);
  for (int point = 0; point < 4; ++point) {
    ImageClassifier model(toy_backbone("toy-b0", 112), 100 + point);
    const Image face = random_image(112, 112, 200 + point);
    const double target = point % 2 ? 0.975 : 0.025;
    nn::ParameterSet grads = model.parameters().zeros_like();
    double z = 0;
    const double loss = model.accumulate_gradient(face, target, grads, &z);
    EXPECT_NEAR(loss, bce_with_logit(model.logit(face), target), 1e-12);
    EXPECT_EQ(z, model.logit(face));
    auto f = [&] { return bce_with_logit(model.logit(face), target); };
    EXPECT_LT(forgery::testing::gradient_check(model.parameters(), grads, f, rng, 10), 1e-4);
  }
}

TEST(ImageClassifier, CheckpointRoundTrip) {
  const ImageClassifier model(toy_backbone("toy-b2", 112), 8);
  Checkpoint ckpt;
  model.save(ckpt, "m.");
  const ImageClassifier back = ImageClassifier::load(ckpt, "m.");
  EXPECT_EQ(back.spec(), model.spec());
  EXPECT_EQ(back.parameters(), model.parameters());
  const Image face = random_image(112, 112, 4);
  EXPECT_EQ(back.score(face), model.score(face));
  EXPECT_THROW(ImageClassifier::load(ckpt, "other."), std::runtime_error);
}

TEST(ClipSpec, StandardShapesOnlyUnlessReduced) {
  EXPECT_NO_THROW(ClipSpec::standard(112).validate());
  EXPECT_NO_THROW(ClipSpec::standard(224).validate());
  EXPECT_THROW((ClipSpec{32, 112, 112, false}.validate()), std::invalid_argument);
  EXPECT_NO_THROW(ClipSpec::reduced_for_tests(8, 32).validate());
}

TEST(BuildClip, ResamplesTimeAndSpace) {
  std::vector<Image> faces;
  for (int i = 0; i < 3; ++i) faces.push_back(Image(20, 20, 0.1f * i));
  const auto clip = build_clip(faces, ClipSpec::reduced_for_tests(6, 16));
  ASSERT_EQ(clip.size(), 6u);
  EXPECT_EQ(clip[0].height(), 16);
  EXPECT_FLOAT_EQ(clip[0].at(0, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(clip[5].at(0, 0, 0), 0.2f);
  EXPECT_THROW(build_clip({}, ClipSpec::reduced_for_tests(6, 16)), std::invalid_argument);
}

TEST(Video3dClassifier, RangeAndShapeChecks) {
  const ClipSpec spec = ClipSpec::reduced_for_tests(8, 32);
  const Video3dClassifier model(spec, 1);
  const std::vector<Image> black(8, Image(32, 32, 0.0f));
  const double p = model.score(black);
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
  std::vector<Image> clip;
  for (int t = 0; t < 8; ++t) clip.push_back(random_image(32, 32, t));
  std::vector<Image> reversed(clip.rbegin(), clip.rend());
  for (double s : {model.score(clip), model.score(reversed)}) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
  EXPECT_THROW(model.score(std::vector<Image>(7, Image(32, 32))), std::invalid_argument);
  EXPECT_THROW(model.score(std::vector<Image>(8, Image(16, 16))), std::invalid_argument);
}

TEST(Video3dClassifier, GradientMatchesFiniteDifferences) {
  Rng rng(12);
  const ClipSpec spec = ClipSpec::reduced_for_tests(8, 32);
  for (int point = 0; point < 4; ++point) {
    Video3dClassifier model(spec, 40 + point);
    std::vector<Image> clip;
    for (int t = 0; t < 8; ++t) clip.push_back(random_image(32, 32, 1000 * point + t));
    const double target = point % 2 ? 0.9 : 0.1;
    nn::ParameterSet grads = model.parameters().zeros_like();
    model.accumulate_gradient(clip, target, grads);
    auto f = [&] { return bce_with_logit(model.logit(clip), target); };
    EXPECT_LT(forgery::testing::gradient_check(model.parameters(), grads, f, rng, 10), 1e-4);
  }
}

TEST(Video3dClassifier, CheckpointRoundTrip) {
  const Video3dClassifier model(ClipSpec::reduced_for_tests(8, 32), 2);
  Checkpoint ckpt;
  model.save(ckpt, "clip.");
  const Video3dClassifier back = Video3dClassifier::load(ckpt, "clip.");
  EXPECT_EQ(back.clip_spec(), model.clip_spec());
  EXPECT_EQ(back.parameters(), model.parameters());
}

TEST(TemporalAttentionModel, ScoresSelectedFrames) {
  auto extractor = std::make_shared<const ImageClassifier>(toy_backbone("toy-b0", 112), 4);
  Rng rng(3);
  const auto params = AttentionFusionParams::random(64, 32, rng);
  const TemporalAttentionModel model(extractor, params, 5);
  std::vector<Image> faces;
  for (int i = 0; i < 10; ++i) faces.push_back(random_image(112, 112, i));
  const Eigen::MatrixXd feats = model.sequence_features(faces);
  ASSERT_EQ(feats.rows(), 5);
  const auto row2 = extractor->features(faces[4]);
  for (int j = 0; j < 64; ++j) EXPECT_EQ(feats(2, j), row2[j]);
  const double s = model.score(faces);
  EXPECT_NEAR(s, nn::sigmoid(attention_logit(feats, params)), 1e-15);
  EXPECT_EQ(select_sequence_features(*extractor, std::span(faces).first(3), 5).rows(), 3);

  Checkpoint ckpt;
  model.save(ckpt, "video.");
  EXPECT_EQ(TemporalAttentionModel::load(ckpt, "video.", extractor).score(faces), s);
}
