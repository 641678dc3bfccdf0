#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "forgery/image.hpp"
#include "forgery/rng.hpp"

namespace forgery {

// ---------------------------------------------------------------------------
// Image-level distortions with five intensity levels each.
// ---------------------------------------------------------------------------

enum class DistortionKind { CS, CC, BW, GNC, GB, JPEG };

/// Mixed distortions are always applied in this order; compression goes last.
inline constexpr std::array<DistortionKind, 6> kCanonicalDistortionOrder = {
    DistortionKind::CS, DistortionKind::CC, DistortionKind::BW,
    DistortionKind::GNC, DistortionKind::GB, DistortionKind::JPEG};

struct DistortionSpec {
  DistortionKind kind = DistortionKind::GNC;
  int level = 1;  // 1 (mildest) .. 5

  bool operator==(const DistortionSpec&) const = default;
};

/// Canonical level tables, indexed by level - 1.
struct DistortionLevels {
  static constexpr std::array<double, 5> saturation_scale = {0.9, 0.8, 0.6, 0.4, 0.2};
  static constexpr std::array<double, 5> contrast_scale = {0.9, 0.8, 0.6, 0.4, 0.2};
  static constexpr std::array<int, 5> block_count = {1, 2, 4, 8, 16};
  static constexpr int block_size = 16;
  /// Noise variance for unit-range pixels, per color channel.
  static constexpr std::array<double, 5> noise_variance = {0.002, 0.005, 0.01, 0.02, 0.05};
  static constexpr std::array<double, 5> blur_sigma = {0.5, 1.0, 2.0, 3.0, 5.0};
  static constexpr std::array<int, 5> jpeg_quality = {90, 70, 50, 30, 10};
};

std::string_view to_string(DistortionKind kind);
/// Accepts the short codes (CS, CC, BW, GNC, GB, JPEG); throws std::invalid_argument otherwise.
DistortionKind parse_distortion_kind(std::string_view code);

// Primitives; each returns a new image clamped to [0,1].
Image scale_saturation(const Image& img, double factor);
Image scale_contrast(const Image& img, double factor);
Image occlude_blocks(const Image& img, int count, int block_size, Rng& rng);
Image add_color_noise(const Image& img, double variance, Rng& rng);
Image gaussian_blur(const Image& img, double sigma);
Image jpeg_roundtrip(const Image& img, int quality);

/// Deterministic in (img, spec, seed). Throws std::invalid_argument on a bad kind or level.
Image apply_distortion(const Image& img, const DistortionSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training-time augmentation policies.
// ---------------------------------------------------------------------------

enum class AugmentOp {
  random_flip,
  random_crop,
  brightness_contrast,
  patch_gaussian,
  image_compression,
  gaussian_blur,
  color_noise,
  rand_augment,
};

std::string_view to_string(AugmentOp op);
AugmentOp parse_augment_op(std::string_view name);

struct AugmentStep {
  AugmentOp op = AugmentOp::random_flip;
  double probability = 0.5;

  bool operator==(const AugmentStep&) const = default;
};

struct AugmentPolicy {
  double mixup_probability = 0.2;
  std::vector<AugmentStep> extra_ops;
  std::uint64_t seed = 0;
  int train_size = 224;

  // Magnitudes for the extra ops.
  double crop_min_scale = 0.8;
  int patch_size = 32;
  double patch_sigma = 0.1;
  double brightness_delta = 0.2;
  double contrast_delta = 0.2;
  int jpeg_quality_min = 30;
  int jpeg_quality_max = 95;
  double blur_sigma_min = 0.5;
  double blur_sigma_max = 2.0;
  double noise_variance_max = 0.01;

  // RandAugment: pick `rand_augment_ops` distinct ops from the pool, each at a fixed
  // magnitude in [0,1] of its range.
  int rand_augment_ops = 2;
  double rand_augment_magnitude = 0.5;
  std::vector<AugmentOp> rand_augment_pool = {AugmentOp::brightness_contrast, AugmentOp::gaussian_blur,
                                              AugmentOp::image_compression, AugmentOp::color_noise};

  bool operator==(const AugmentPolicy&) const = default;
};

/// Throws std::invalid_argument when probabilities or magnitudes are out of range.
void validate(const AugmentPolicy& policy);

/// Copy of `policy` reseeded for one image; derived from (policy.seed, stream).
AugmentPolicy reseeded(const AugmentPolicy& policy, std::uint64_t stream);

AugmentPolicy champion_augment_policy();
AugmentPolicy dual_branch_augment_policy();
AugmentPolicy clip3d_augment_policy();

/// With probability mixup_probability, applies a uniformly chosen nonempty subset of the
/// six distortions, each at a uniform level, in canonical order. Otherwise returns `img`.
Image mixup_distortions(const Image& img, const AugmentPolicy& policy);

/// Distortion mixup, then each extra op in list order with its own probability, then a
/// resize to train_size × train_size.
Image train_augment(const Image& img, const AugmentPolicy& policy);

}  // namespace forgery
