#include "forgery/training.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "forgery/losses.hpp"
#include "forgery/video_ingest.hpp"

namespace forgery {

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::adamw ? "adamw" : "adam"; }

std::string_view to_string(LrSchedule schedule) {
  return schedule == LrSchedule::constant ? "constant" : "halve_every_5";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adamw") return OptimizerKind::adamw;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer: " + std::string(name));
}

LrSchedule parse_lr_schedule(std::string_view name) {
  if (name == "constant") return LrSchedule::constant;
  if (name == "halve_every_5") return LrSchedule::halve_every_5;
  throw std::invalid_argument("unknown lr schedule: " + std::string(name));
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (!(cfg.label_smoothing >= 0 && cfg.label_smoothing < 1))
    throw std::invalid_argument("label_smoothing must be in [0, 1)");
  if (cfg.frames_per_video < 1) throw std::invalid_argument("frames_per_video must be at least 1");
  if (!(cfg.beta1 >= 0 && cfg.beta1 < 1 && cfg.beta2 >= 0 && cfg.beta2 < 1))
    throw std::invalid_argument("Adam betas must be in [0, 1)");
  if (cfg.weight_decay < 0) throw std::invalid_argument("weight_decay must be nonnegative");
}

TrainConfig champion_train_config() {
  TrainConfig c;
  c.optimizer = OptimizerKind::adamw;
  c.learning_rate = 1e-3;
  c.weight_decay = 1e-2;
  c.batch_size = 128;
  c.epochs = 50;
  c.lr_schedule = LrSchedule::constant;
  c.label_smoothing = 0.05;
  c.frames_per_video = 15;
  return c;
}

TrainConfig dual_branch_stage1_config() {
  TrainConfig c;
  c.optimizer = OptimizerKind::adam;
  c.learning_rate = 2e-4;
  c.beta1 = 0.9;
  c.beta2 = 0.999;
  c.weight_decay = 1e-5;
  c.batch_size = 32;
  c.epochs = 20;
  c.lr_schedule = LrSchedule::halve_every_5;
  c.label_smoothing = 0.0;
  c.frames_per_video = 10;
  return c;
}

TrainConfig dual_branch_stage2_config() {
  TrainConfig c = dual_branch_stage1_config();
  c.frames_per_video = 5;
  return c;
}

TrainConfig clip3d_train_config() {
  TrainConfig c;
  c.optimizer = OptimizerKind::adam;
  c.learning_rate = 1e-3;
  c.weight_decay = 0.0;
  c.batch_size = 8;
  c.epochs = 30;
  c.lr_schedule = LrSchedule::constant;
  c.label_smoothing = 0.0;
  c.frames_per_video = 64;
  return c;
}

double learning_rate_at(const TrainConfig& cfg, int epoch) {
  if (cfg.lr_schedule == LrSchedule::constant) return cfg.learning_rate;
  return cfg.learning_rate * std::pow(0.5, epoch / 5);
}

AdamOptimizer::AdamOptimizer(const TrainConfig& cfg, const nn::ParameterSet& like)
    : cfg_(cfg), m_(like.zeros_like()), v_(like.zeros_like()) {}

void AdamOptimizer::step(nn::ParameterSet& params, const nn::ParameterSet& grads, double lr) {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  constexpr double eps = 1e-8;
  const bool decoupled = cfg_.optimizer == OptimizerKind::adamw;
  for (std::size_t a = 0; a < params.size(); ++a) {
    auto& p = params[a].values;
    const auto& g = grads[a].values;
    auto& m = m_[a].values;
    auto& v = v_[a].values;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = decoupled ? g[i] : g[i] + cfg_.weight_decay * p[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
      if (decoupled) p[i] -= lr * cfg_.weight_decay * p[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  }
}

namespace {

void check_videos(std::span<const TrainingVideo> videos) {
  if (videos.empty()) throw std::invalid_argument("training set is empty");
  std::size_t fake = 0;
  for (const auto& v : videos) {
    if (v.label != 0 && v.label != 1) throw std::invalid_argument("labels must be 0 or 1");
    fake += static_cast<std::size_t>(v.label);
  }
  if (2 * fake != videos.size()) throw std::invalid_argument("training set must be class-balanced");
}

struct SampleResult {
  double loss = 0;
  bool correct = false;
};

/// Shared epoch/batch loop. `run_sample(sample, epoch, grads)` adds one sample's gradient.
TrainLog run_training(const TrainConfig& cfg, std::size_t n_samples, nn::ParameterSet& params, std::uint64_t seed,
                      const std::function<SampleResult(std::size_t, int, nn::ParameterSet&)>& run_sample) {
  if (n_samples == 0) throw std::invalid_argument("no training samples (every video lacks faces)");
  AdamOptimizer optimizer(cfg, params);
  nn::ParameterSet grads = params.zeros_like();
  std::vector<std::size_t> order(n_samples);
  TrainLog log;
  const Rng shuffle_root = Rng(seed).split(0x73687566ULL);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = shuffle_root.split(static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle.engine());
    const double lr = learning_rate_at(cfg, epoch);
    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n_samples; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n_samples, start + static_cast<std::size_t>(cfg.batch_size));
      grads.set_zero();
      for (std::size_t i = start; i < stop; ++i) {
        const SampleResult r = run_sample(order[i], epoch, grads);
        loss_sum += r.loss;
        correct += r.correct ? 1 : 0;
      }
      grads.scale(1.0 / static_cast<double>(stop - start));
      optimizer.step(params, grads, lr);
    }
    log.epochs.push_back({epoch, lr, loss_sum / static_cast<double>(n_samples),
                          static_cast<double>(correct) / static_cast<double>(n_samples)});
  }
  return log;
}

struct FaceSample {
  const Image* face;
  int label;
  std::uint64_t id;
};

std::vector<FaceSample> face_samples(std::span<const TrainingVideo> videos, int frames_per_video) {
  std::vector<FaceSample> samples;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    if (videos[v].faces.empty()) continue;
    for (FrameIndex i : sample_frame_indices(videos[v].faces.size(), static_cast<std::size_t>(frames_per_video)))
      samples.push_back({&videos[v].faces[i], videos[v].label, (static_cast<std::uint64_t>(v) << 20) | i});
  }
  return samples;
}

std::uint64_t sample_stream(int epoch, std::uint64_t id) {
  return mix_seed(static_cast<std::uint64_t>(epoch), id);
}

}  // namespace

TrainedImageModel train_image_model(const TrainConfig& cfg, const BackboneSpec& backbone,
                                    std::span<const TrainingVideo> videos, const AugmentPolicy& policy,
                                    std::uint64_t seed) {
  validate(cfg);
  validate(policy);
  check_videos(videos);
  const auto samples = face_samples(videos, cfg.frames_per_video);

  AugmentPolicy base = policy;
  base.train_size = backbone.input_size;
  base.seed = mix_seed(seed, 0x61756700ULL);

  TrainedImageModel out{ImageClassifier(backbone, mix_seed(seed, 0x696e6974ULL)), {}};
  ImageClassifier& model = out.model;
  out.log = run_training(cfg, samples.size(), model.parameters(), seed,
                         [&](std::size_t s, int epoch, nn::ParameterSet& grads) {
                           const FaceSample& sample = samples[s];
                           const Image input =
                               train_augment(*sample.face, reseeded(base, sample_stream(epoch, sample.id)));
                           const double target = smoothed_target(sample.label, cfg.label_smoothing);
                           SampleResult r;
                           double logit = 0;
                           r.loss = model.accumulate_gradient(input, target, grads, &logit);
                           r.correct = (logit >= 0) == (sample.label == 1);
                           return r;
                         });
  return out;
}

TrainedTemporalModel train_temporal_stage2(const ImageClassifier& frozen, const TrainConfig& cfg,
                                           std::span<const TrainingVideo> videos, std::uint64_t seed,
                                           int hidden_dim) {
  validate(cfg);
  check_videos(videos);
  const int d = frozen.spec().feature_dim;
  const int h = hidden_dim > 0 ? hidden_dim : std::max(1, d / 2);

  // The extractor is frozen, so sequence features are computed once.
  std::vector<Eigen::MatrixXd> features;
  std::vector<int> labels;
  for (const auto& v : videos) {
    if (v.faces.empty()) continue;
    features.push_back(select_sequence_features(frozen, v.faces, cfg.frames_per_video));
    labels.push_back(v.label);
  }

  Rng init(mix_seed(seed, 0x61747400ULL));
  AttentionFusionParams params = AttentionFusionParams::random(d, h, init);
  nn::ParameterSet flat = params.to_parameters();

  TrainedTemporalModel out;
  out.log = run_training(cfg, features.size(), flat, seed, [&](std::size_t s, int, nn::ParameterSet& grads) {
    const AttentionFusionParams current = AttentionFusionParams::from_parameters(flat);
    AttentionFusionParams g = AttentionFusionParams::zeros(d, h);
    SampleResult r;
    r.loss = attention_loss(features[s], current, labels[s], cfg.label_smoothing, &g);
    r.correct = (attention_logit(features[s], current) >= 0) == (labels[s] == 1);
    const nn::ParameterSet gflat = g.to_parameters();
    for (std::size_t a = 0; a < grads.size(); ++a)
      for (std::size_t i = 0; i < grads[a].values.size(); ++i) grads[a].values[i] += gflat[a].values[i];
    return r;
  });
  out.params = AttentionFusionParams::from_parameters(flat);
  return out;
}

TrainedVideo3dModel train_video3d_model(const TrainConfig& cfg, const ClipSpec& clip,
                                        std::span<const TrainingVideo> videos, const AugmentPolicy& policy,
                                        std::uint64_t seed) {
  validate(cfg);
  validate(policy);
  clip.validate();
  check_videos(videos);
  if (clip.height != clip.width) throw std::invalid_argument("clip frames must be square");

  std::vector<std::size_t> usable;
  for (std::size_t v = 0; v < videos.size(); ++v)
    if (!videos[v].faces.empty()) usable.push_back(v);

  AugmentPolicy base = policy;
  base.train_size = clip.height;
  base.seed = mix_seed(seed, 0x61756700ULL);

  TrainedVideo3dModel out{Video3dClassifier(clip, mix_seed(seed, 0x696e6974ULL)), {}};
  Video3dClassifier& model = out.model;
  out.log = run_training(cfg, usable.size(), model.parameters(), seed,
                         [&](std::size_t s, int epoch, nn::ParameterSet& grads) {
                           const TrainingVideo& video = videos[usable[s]];
                           // One policy seed per clip: flips and crops agree across frames.
                           const AugmentPolicy p = reseeded(base, sample_stream(epoch, usable[s]));
                           std::vector<Image> frames = build_clip(video.faces, clip);
                           for (Image& f : frames) f = train_augment(f, p);
                           const double target = smoothed_target(video.label, cfg.label_smoothing);
                           SampleResult r;
                           double logit = 0;
                           r.loss = model.accumulate_gradient(frames, target, grads, &logit);
                           r.correct = (logit >= 0) == (video.label == 1);
                           return r;
                         });
  return out;
}

}  // namespace forgery
