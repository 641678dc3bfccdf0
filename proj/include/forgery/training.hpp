#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forgery/attention.hpp"
#include "forgery/models.hpp"
#include "forgery/nn.hpp"
#include "forgery/perturb.hpp"

namespace forgery {

enum class OptimizerKind { adamw, adam };
enum class LrSchedule { constant, halve_every_5 };

std::string_view to_string(OptimizerKind kind);
std::string_view to_string(LrSchedule schedule);
OptimizerKind parse_optimizer(std::string_view name);
LrSchedule parse_lr_schedule(std::string_view name);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::adamw;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 1e-2;
  int batch_size = 128;
  int epochs = 50;
  LrSchedule lr_schedule = LrSchedule::constant;
  double label_smoothing = 0.05;
  int frames_per_video = 15;

  bool operator==(const TrainConfig&) const = default;
};

/// Throws std::invalid_argument on a nonpositive rate, batch size or epoch count, or
/// smoothing outside [0, 1).
void validate(const TrainConfig& cfg);

TrainConfig champion_train_config();
TrainConfig dual_branch_stage1_config();
TrainConfig dual_branch_stage2_config();
TrainConfig clip3d_train_config();

/// base · 0.5^floor(epoch / 5) under halve_every_5; epochs count from 0.
double learning_rate_at(const TrainConfig& cfg, int epoch);

/// Adam with either decoupled (AdamW) or L2-coupled (Adam) weight decay.
class AdamOptimizer {
 public:
  AdamOptimizer(const TrainConfig& cfg, const nn::ParameterSet& like);
  void step(nn::ParameterSet& params, const nn::ParameterSet& grads, double learning_rate);

 private:
  TrainConfig cfg_;
  nn::ParameterSet m_;
  nn::ParameterSet v_;
  long step_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0;
  double mean_loss = 0;
  double accuracy = 0;  // on the (augmented) training samples seen this epoch
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

/// One labelled video's extracted face crops.
struct TrainingVideo {
  std::string video_id;
  int label = 0;  // 1 = fake
  std::vector<Image> faces;
};

struct TrainedImageModel {
  ImageClassifier model;
  TrainLog log;
};

/// Trains a toy image classifier on up to frames_per_video evenly spaced faces per video,
/// augmented by `policy` (train_size forced to the backbone input size). Requires a
/// nonempty, class-balanced video list.
TrainedImageModel train_image_model(const TrainConfig& cfg, const BackboneSpec& backbone,
                                    std::span<const TrainingVideo> videos, const AugmentPolicy& policy,
                                    std::uint64_t seed);

struct TrainedTemporalModel {
  AttentionFusionParams params;
  TrainLog log;
};

/// Stage 2: the image model is a frozen feature extractor; only the attention module and
/// head are trained, on frames_per_video faces per video. hidden_dim 0 means d/2.
TrainedTemporalModel train_temporal_stage2(const ImageClassifier& frozen, const TrainConfig& cfg,
                                           std::span<const TrainingVideo> videos, std::uint64_t seed,
                                           int hidden_dim = 0);

struct TrainedVideo3dModel {
  Video3dClassifier model;
  TrainLog log;
};

/// One clip per video, built from all of its faces; geometric augmentation is shared by
/// every frame of a clip.
TrainedVideo3dModel train_video3d_model(const TrainConfig& cfg, const ClipSpec& clip,
                                        std::span<const TrainingVideo> videos, const AugmentPolicy& policy,
                                        std::uint64_t seed);

}  // namespace forgery
