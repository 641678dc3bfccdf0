#include <gtest/gtest.h>

#include "forgery/perturb.hpp"
#include "test_support.hpp"

using namespace forgery;
using forgery::testing::gradient_image;
using forgery::testing::random_image;

namespace {

bool in_unit_range(const Image& img) {
  for (float v : img.pixels())
    if (v < 0.0f || v > 1.0f) return false;
  return true;
}

}  // namespace

TEST(Distortions, PreserveShapeRangeAndDeterminism) {
  const Image img = gradient_image(48, 40);
  for (DistortionKind kind : kCanonicalDistortionOrder)
    for (int level = 1; level <= 5; ++level) {
      const Image a = apply_distortion(img, {kind, level}, 99);
      const Image b = apply_distortion(img, {kind, level}, 99);
      EXPECT_EQ(a, b) << to_string(kind) << level;
      EXPECT_EQ(a.height(), 48);
      EXPECT_EQ(a.width(), 40);
      EXPECT_TRUE(in_unit_range(a));
    }
}

TEST(Distortions, RejectBadLevel) {
  const Image img(8, 8, 0.5f);
  EXPECT_THROW(apply_distortion(img, {DistortionKind::GB, 0}, 1), std::invalid_argument);
  EXPECT_THROW(apply_distortion(img, {DistortionKind::GB, 6}, 1), std::invalid_argument);
  EXPECT_THROW(parse_distortion_kind("XYZ"), std::invalid_argument);
  EXPECT_EQ(parse_distortion_kind("GNC"), DistortionKind::GNC);
}

TEST(Distortions, ZeroNoiseIsIdentity) {
  const Image img = random_image(16, 16, 3);
  Rng rng(1);
  EXPECT_EQ(add_color_noise(img, 0.0, rng), img);
}

TEST(Distortions, BlurOfConstantIsConstant) {
  const Image img(32, 32, 0.37f);
  for (int level = 1; level <= 5; ++level) {
    const Image out = apply_distortion(img, {DistortionKind::GB, level}, 0);
    for (float v : out.pixels()) ASSERT_NEAR(v, 0.37f, 1e-6);
  }
}

TEST(Distortions, NoiseVarianceMatchesTable) {
  const Image img(256, 256, 0.5f);
  const Image out = apply_distortion(img, {DistortionKind::GNC, 3}, 2024);
  double sum = 0, sq = 0;
  const auto a = img.pixels();
  const auto b = out.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = b[i] - a[i];
    sum += r;
    sq += r * r;
  }
  const double n = static_cast<double>(a.size());
  const double var = sq / n - (sum / n) * (sum / n);
  EXPECT_NEAR(var, DistortionLevels::noise_variance[2], 0.1 * DistortionLevels::noise_variance[2]);
}

TEST(Distortions, SeverityIsMonotone) {
  const Image img = gradient_image(64, 64);
  for (DistortionKind kind : {DistortionKind::GNC, DistortionKind::GB}) {
    double prev = 0;
    for (int level = 1; level <= 5; ++level) {
      const double d = mean_abs_difference(img, apply_distortion(img, {kind, level}, 5));
      EXPECT_GE(d, prev) << to_string(kind) << level;
      prev = d;
    }
  }
  EXPECT_GT(psnr(img, apply_distortion(img, {DistortionKind::JPEG, 1}, 0)),
            psnr(img, apply_distortion(img, {DistortionKind::JPEG, 5}, 0)));
}

TEST(Distortions, SaturationAndContrastMoveTowardGray) {
  const Image img = gradient_image(32, 32);
  const Image cs = scale_saturation(img, 0.2);
  const Image cc = scale_contrast(img, 0.2);
  EXPECT_LT(mean_abs_difference(cs, scale_saturation(img, 0.0)), mean_abs_difference(img, scale_saturation(img, 0.0)));
  EXPECT_LT(mean_abs_difference(cc, scale_contrast(img, 0.0)), mean_abs_difference(img, scale_contrast(img, 0.0)));
  EXPECT_EQ(scale_saturation(Image(4, 4, 0.3f), 0.5), Image(4, 4, 0.3f));
}

TEST(Distortions, BlockOcclusionTouchesAtMostTheBlocks) {
  const Image img = gradient_image(64, 64);
  Rng rng(4);
  const Image out = occlude_blocks(img, 2, 16, rng);
  int changed = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) changed += out.at(y, x, 0) != img.at(y, x, 0) || out.at(y, x, 2) != img.at(y, x, 2);
  EXPECT_GT(changed, 0);
  EXPECT_LE(changed, 2 * 16 * 16);
}

TEST(Mixup, ProbabilityZeroIsIdentity) {
  AugmentPolicy p;
  p.mixup_probability = 0.0;
  const Image img = gradient_image(32, 32);
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_EQ(mixup_distortions(img, reseeded(p, s)), img);
}

TEST(Mixup, ProbabilityOneIsDeterministicAndChangesImage) {
  AugmentPolicy p;
  p.mixup_probability = 1.0;
  p.seed = 17;
  const Image img = gradient_image(32, 32);
  const Image a = mixup_distortions(img, p);
  EXPECT_EQ(a, mixup_distortions(img, p));
  EXPECT_NE(a, img);
}

TEST(Mixup, TriggerFrequency) {
  AugmentPolicy p = champion_augment_policy();
  const Image img = gradient_image(16, 16);
  int modified = 0;
  const int trials = 4000;
  for (int s = 0; s < trials; ++s) modified += !(mixup_distortions(img, reseeded(p, s)) == img);
  EXPECT_NEAR(static_cast<double>(modified) / trials, 0.2, 0.03);
}

TEST(TrainAugment, FlipWithProbabilityOne) {
  AugmentPolicy p;
  p.mixup_probability = 0;
  p.train_size = 24;
  p.extra_ops = {{AugmentOp::random_flip, 1.0}};
  const Image img = random_image(24, 24, 8);
  EXPECT_EQ(train_augment(img, p), flip_horizontal(img));
}

TEST(TrainAugment, EmptyOpsResizesOnly) {
  AugmentPolicy p;
  p.mixup_probability = 0;
  p.train_size = 32;
  const Image img = random_image(32, 32, 8);
  EXPECT_EQ(train_augment(img, p), img);
  p.train_size = 16;
  EXPECT_EQ(train_augment(img, p), resize_bilinear(img, 16, 16));
}

TEST(TrainAugment, ZeroSizePatchIsIdentity) {
  AugmentPolicy p;
  p.mixup_probability = 0;
  p.train_size = 20;
  p.patch_size = 0;
  p.extra_ops = {{AugmentOp::patch_gaussian, 1.0}};
  const Image img = random_image(20, 20, 2);
  EXPECT_EQ(train_augment(img, p), img);
}

TEST(TrainAugment, PresetsProduceTrainingResolutionDeterministically) {
  const Image img = gradient_image(50, 50);
  for (AugmentPolicy p : {champion_augment_policy(), dual_branch_augment_policy(), clip3d_augment_policy()}) {
    validate(p);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const AugmentPolicy q = reseeded(p, s);
      const Image a = train_augment(img, q);
      EXPECT_EQ(a.height(), p.train_size);
      EXPECT_EQ(a.width(), p.train_size);
      EXPECT_TRUE(in_unit_range(a));
      EXPECT_EQ(a, train_augment(img, q));
    }
  }
}

TEST(AugmentPolicy, ValidationAndNames) {
  AugmentPolicy p;
  p.mixup_probability = 1.5;
  EXPECT_THROW(validate(p), std::invalid_argument);
  p = AugmentPolicy{};
  p.rand_augment_pool = {AugmentOp::random_flip};
  EXPECT_THROW(validate(p), std::invalid_argument);
  for (AugmentOp op : {AugmentOp::random_flip, AugmentOp::patch_gaussian, AugmentOp::rand_augment})
    EXPECT_EQ(parse_augment_op(to_string(op)), op);
  EXPECT_THROW(parse_augment_op("mosaic"), std::invalid_argument);
}
