#include "forgery/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace forgery {

namespace {

constexpr std::uint64_t kMixupStream = 0x6d69787570ULL;
constexpr std::uint64_t kExtraOpsStream = 0x6f7073ULL;

void check_level(int level) {
  if (level < 1 || level > 5) throw std::invalid_argument("distortion level must be in 1..5");
}

std::size_t level_index(int level) { return static_cast<std::size_t>(level - 1); }

Image brightness_contrast(const Image& img, double brightness, double contrast) {
  Image out = img;
  for (float& v : out.pixels()) v = static_cast<float>((v - 0.5) * contrast + 0.5 + brightness);
  clamp_unit(out);
  return out;
}

Image patch_gaussian(const Image& img, int patch_size, double sigma, Rng& rng) {
  if (patch_size <= 0 || img.empty() || sigma <= 0) return img;
  const int cx = rng.uniform_int(0, img.width() - 1);
  const int cy = rng.uniform_int(0, img.height() - 1);
  const int x0 = std::max(0, cx - patch_size / 2);
  const int y0 = std::max(0, cy - patch_size / 2);
  const int x1 = std::min(img.width(), cx - patch_size / 2 + patch_size);
  const int y1 = std::min(img.height(), cy - patch_size / 2 + patch_size);
  Image out = img;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      for (int c = 0; c < Image::kChannels; ++c)
        out.at(y, x, c) = std::clamp(static_cast<float>(out.at(y, x, c) + rng.normal(0.0, sigma)), 0.0f, 1.0f);
  return out;
}

Image random_crop(const Image& img, double min_scale, int out_size, Rng& rng) {
  const double scale = rng.uniform(min_scale, 1.0);
  const double cw = img.width() * scale;
  const double ch = img.height() * scale;
  const double x = rng.uniform(0.0, img.width() - cw);
  const double y = rng.uniform(0.0, img.height() - ch);
  return crop_resize(img, x, y, cw, ch, out_size, out_size);
}

// One photometric op at magnitude m in [0,1] of its configured range.
Image rand_augment_op(const Image& img, AugmentOp op, double m, const AugmentPolicy& p, Rng& rng) {
  switch (op) {
    case AugmentOp::brightness_contrast: {
      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      return brightness_contrast(img, sign * m * p.brightness_delta, 1.0 + sign * m * p.contrast_delta);
    }
    case AugmentOp::gaussian_blur:
      return gaussian_blur(img, p.blur_sigma_min + m * (p.blur_sigma_max - p.blur_sigma_min));
    case AugmentOp::image_compression:
      return jpeg_roundtrip(
          img, static_cast<int>(std::lround(p.jpeg_quality_max - m * (p.jpeg_quality_max - p.jpeg_quality_min))));
    case AugmentOp::color_noise:
      return add_color_noise(img, m * p.noise_variance_max, rng);
    case AugmentOp::patch_gaussian:
      return patch_gaussian(img, p.patch_size, m * p.patch_sigma * 2.0, rng);
    default:
      throw std::invalid_argument("rand_augment pool may only hold photometric ops");
  }
}

Image apply_extra_op(const Image& img, AugmentOp op, const AugmentPolicy& p, Rng& rng) {
  switch (op) {
    case AugmentOp::random_flip:
      return flip_horizontal(img);
    case AugmentOp::random_crop:
      return random_crop(img, p.crop_min_scale, p.train_size, rng);
    case AugmentOp::brightness_contrast: {
      const double b = rng.uniform(-p.brightness_delta, p.brightness_delta);
      const double c = rng.uniform(1.0 - p.contrast_delta, 1.0 + p.contrast_delta);
      return brightness_contrast(img, b, c);
    }
    case AugmentOp::patch_gaussian:
      return patch_gaussian(img, p.patch_size, p.patch_sigma, rng);
    case AugmentOp::image_compression:
      return jpeg_roundtrip(img, rng.uniform_int(p.jpeg_quality_min, p.jpeg_quality_max));
    case AugmentOp::gaussian_blur:
      return gaussian_blur(img, rng.uniform(p.blur_sigma_min, p.blur_sigma_max));
    case AugmentOp::color_noise:
      return add_color_noise(img, rng.uniform(0.0, p.noise_variance_max), rng);
    case AugmentOp::rand_augment: {
      std::vector<AugmentOp> pool = p.rand_augment_pool;
      const int picks = std::min<int>(p.rand_augment_ops, static_cast<int>(pool.size()));
      Image out = img;
      for (int i = 0; i < picks; ++i) {
        const int j = rng.uniform_int(i, static_cast<int>(pool.size()) - 1);
        std::swap(pool[i], pool[j]);
        out = rand_augment_op(out, pool[i], p.rand_augment_magnitude, p, rng);
      }
      return out;
    }
  }
  throw std::invalid_argument("unknown augment op");
}

}  // namespace

std::string_view to_string(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::CS: return "CS";
    case DistortionKind::CC: return "CC";
    case DistortionKind::BW: return "BW";
    case DistortionKind::GNC: return "GNC";
    case DistortionKind::GB: return "GB";
    case DistortionKind::JPEG: return "JPEG";
  }
  throw std::invalid_argument("unknown distortion kind");
}

DistortionKind parse_distortion_kind(std::string_view code) {
  for (DistortionKind k : kCanonicalDistortionOrder)
    if (to_string(k) == code) return k;
  throw std::invalid_argument("unknown distortion kind: " + std::string(code));
}

Image scale_saturation(const Image& img, double factor) {
  Image out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double gray = luma(img, y, x);
      for (int c = 0; c < Image::kChannels; ++c)
        out.at(y, x, c) = static_cast<float>(gray + factor * (img.at(y, x, c) - gray));
    }
  clamp_unit(out);
  return out;
}

Image scale_contrast(const Image& img, double factor) {
  if (img.empty()) return img;
  double mean = 0.0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) mean += luma(img, y, x);
  mean /= static_cast<double>(img.height()) * img.width();
  Image out = img;
  for (float& v : out.pixels()) v = static_cast<float>(mean + factor * (v - mean));
  clamp_unit(out);
  return out;
}

Image occlude_blocks(const Image& img, int count, int block_size, Rng& rng) {
  if (block_size <= 0) throw std::invalid_argument("block size must be positive");
  Image out = img;
  if (img.empty()) return out;
  for (int i = 0; i < count; ++i) {
    const int x0 = rng.uniform_int(0, std::max(0, img.width() - block_size));
    const int y0 = rng.uniform_int(0, std::max(0, img.height() - block_size));
    const auto gray = static_cast<float>(rng.uniform());
    for (int y = y0; y < std::min(img.height(), y0 + block_size); ++y)
      for (int x = x0; x < std::min(img.width(), x0 + block_size); ++x)
        for (int c = 0; c < Image::kChannels; ++c) out.at(y, x, c) = gray;
  }
  return out;
}

Image add_color_noise(const Image& img, double variance, Rng& rng) {
  if (variance < 0) throw std::invalid_argument("noise variance must be nonnegative");
  Image out = img;
  if (variance == 0) return out;
  std::normal_distribution<double> noise(0.0, std::sqrt(variance));
  for (float& v : out.pixels()) v = std::clamp(static_cast<float>(v + noise(rng.engine())), 0.0f, 1.0f);
  return out;
}

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma < 0) throw std::invalid_argument("blur sigma must be nonnegative");
  if (sigma == 0 || img.empty()) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  const double norm = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& k : kernel) k /= norm;

  const int h = img.height();
  const int w = img.width();
  std::vector<double> tmp(img.size());
  auto tmp_at = [&](int y, int x, int c) -> double& { return tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c]; };

  // Separable pass with replicated borders.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * img.at(y, std::clamp(x + k, 0, w - 1), c);
        tmp_at(y, x, c) = acc;
      }
  Image out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp_at(std::clamp(y + k, 0, h - 1), x, c);
        out.at(y, x, c) = static_cast<float>(acc);
      }
  clamp_unit(out);
  return out;
}

Image jpeg_roundtrip(const Image& img, int quality) {
  const auto bytes = encode_jpeg(img, quality);
  return decode_image(bytes);
}

Image apply_distortion(const Image& img, const DistortionSpec& spec, std::uint64_t seed) {
  check_level(spec.level);
  const std::size_t li = level_index(spec.level);
  Rng rng(seed);
  switch (spec.kind) {
    case DistortionKind::CS: return scale_saturation(img, DistortionLevels::saturation_scale[li]);
    case DistortionKind::CC: return scale_contrast(img, DistortionLevels::contrast_scale[li]);
    case DistortionKind::BW:
      return occlude_blocks(img, DistortionLevels::block_count[li], DistortionLevels::block_size, rng);
    case DistortionKind::GNC: return add_color_noise(img, DistortionLevels::noise_variance[li], rng);
    case DistortionKind::GB: return gaussian_blur(img, DistortionLevels::blur_sigma[li]);
    case DistortionKind::JPEG: return jpeg_roundtrip(img, DistortionLevels::jpeg_quality[li]);
  }
  throw std::invalid_argument("unknown distortion kind");
}

// ---- policies ----

std::string_view to_string(AugmentOp op) {
  switch (op) {
    case AugmentOp::random_flip: return "random_flip";
    case AugmentOp::random_crop: return "random_crop";
    case AugmentOp::brightness_contrast: return "brightness_contrast";
    case AugmentOp::patch_gaussian: return "patch_gaussian";
    case AugmentOp::image_compression: return "image_compression";
    case AugmentOp::gaussian_blur: return "gaussian_blur";
    case AugmentOp::color_noise: return "color_noise";
    case AugmentOp::rand_augment: return "rand_augment";
  }
  throw std::invalid_argument("unknown augment op");
}

AugmentOp parse_augment_op(std::string_view name) {
  for (AugmentOp op : {AugmentOp::random_flip, AugmentOp::random_crop, AugmentOp::brightness_contrast,
                       AugmentOp::patch_gaussian, AugmentOp::image_compression, AugmentOp::gaussian_blur,
                       AugmentOp::color_noise, AugmentOp::rand_augment})
    if (to_string(op) == name) return op;
  throw std::invalid_argument("unknown augment op: " + std::string(name));
}

void validate(const AugmentPolicy& p) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p.mixup_probability)) throw std::invalid_argument("mixup_probability must be in [0,1]");
  for (const auto& step : p.extra_ops)
    if (!in_unit(step.probability)) throw std::invalid_argument("augment op probability must be in [0,1]");
  if (p.train_size <= 0) throw std::invalid_argument("train_size must be positive");
  if (!(p.crop_min_scale > 0.0 && p.crop_min_scale <= 1.0)) throw std::invalid_argument("crop_min_scale must be in (0,1]");
  if (p.patch_size < 0 || p.patch_sigma < 0) throw std::invalid_argument("patch parameters must be nonnegative");
  if (p.jpeg_quality_min < 0 || p.jpeg_quality_max > 100 || p.jpeg_quality_min > p.jpeg_quality_max)
    throw std::invalid_argument("jpeg quality range must lie in [0,100]");
  if (p.blur_sigma_min < 0 || p.blur_sigma_min > p.blur_sigma_max) throw std::invalid_argument("bad blur sigma range");
  if (p.noise_variance_max < 0) throw std::invalid_argument("noise_variance_max must be nonnegative");
  if (!in_unit(p.rand_augment_magnitude)) throw std::invalid_argument("rand_augment_magnitude must be in [0,1]");
  for (AugmentOp op : p.rand_augment_pool)
    if (op == AugmentOp::random_flip || op == AugmentOp::random_crop || op == AugmentOp::rand_augment)
      throw std::invalid_argument("rand_augment pool may only hold photometric ops");
}

AugmentPolicy reseeded(const AugmentPolicy& policy, std::uint64_t stream) {
  AugmentPolicy out = policy;
  out.seed = mix_seed(policy.seed, stream);
  return out;
}

AugmentPolicy champion_augment_policy() {
  AugmentPolicy p;
  p.mixup_probability = 0.2;
  p.train_size = 224;
  return p;
}

AugmentPolicy dual_branch_augment_policy() {
  AugmentPolicy p;
  p.mixup_probability = 0.2;
  p.train_size = 320;
  p.extra_ops = {{AugmentOp::rand_augment, 0.5},      {AugmentOp::patch_gaussian, 0.3},
                 {AugmentOp::gaussian_blur, 0.1},     {AugmentOp::image_compression, 0.3},
                 {AugmentOp::random_flip, 0.5},       {AugmentOp::random_crop, 0.5},
                 {AugmentOp::brightness_contrast, 0.3}};
  return p;
}

AugmentPolicy clip3d_augment_policy() {
  AugmentPolicy p;
  p.mixup_probability = 0.0;
  p.train_size = 112;
  p.extra_ops = {{AugmentOp::gaussian_blur, 0.2},
                 {AugmentOp::color_noise, 0.2},
                 {AugmentOp::random_crop, 0.5},
                 {AugmentOp::random_flip, 0.5}};
  return p;
}

Image mixup_distortions(const Image& img, const AugmentPolicy& policy) {
  Rng rng = Rng(policy.seed).split(kMixupStream);
  if (!rng.bernoulli(policy.mixup_probability)) return img;
  const int mask = rng.uniform_int(1, (1 << kCanonicalDistortionOrder.size()) - 1);
  Image out = img;
  for (std::size_t i = 0; i < kCanonicalDistortionOrder.size(); ++i) {
    if (!(mask & (1 << i))) continue;
    const int level = rng.uniform_int(1, 5);
    const std::uint64_t seed = rng.engine()();
    out = apply_distortion(out, {kCanonicalDistortionOrder[i], level}, seed);
  }
  return out;
}

Image train_augment(const Image& img, const AugmentPolicy& policy) {
  Image out = mixup_distortions(img, policy);
  const Rng base = Rng(policy.seed).split(kExtraOpsStream);
  for (std::size_t i = 0; i < policy.extra_ops.size(); ++i) {
    Rng rng = base.split(i);
    const AugmentStep& step = policy.extra_ops[i];
    if (!rng.bernoulli(step.probability)) continue;
    out = apply_extra_op(out, step.op, policy, rng);
  }
  return resize_bilinear(out, policy.train_size, policy.train_size);
}

}  // namespace forgery
