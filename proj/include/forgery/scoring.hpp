#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forgery/face_extract.hpp"
#include "forgery/models.hpp"
#include "forgery/video_ingest.hpp"

namespace forgery {

/// Score for a video with no usable face.
inline constexpr double kNeutralScore = 0.5;

enum class PipelineVariant { champion, dual_branch, clip3d };

std::string_view to_string(PipelineVariant variant);
PipelineVariant parse_variant(std::string_view name);

struct PipelineConfig {
  PipelineVariant variant = PipelineVariant::champion;
  std::size_t n_frames = 15;
  double crop_factor = 1.2;
  int out_size = 224;
  bool tta_flip = false;
  double clip_lo = 0.01;
  double clip_hi = 0.99;
  int sequence_length = 5;  // video branch (dual_branch)
  ClipSpec clip;            // clip3d

  bool operator==(const PipelineConfig&) const = default;
};

PipelineConfig champion_pipeline();
PipelineConfig dual_branch_pipeline();
PipelineConfig clip3d_pipeline();
PipelineConfig default_pipeline(PipelineVariant variant);

/// Throws std::invalid_argument unless 0 <= clip_lo < clip_hi <= 1 and sizes are positive.
void validate(const PipelineConfig& cfg);

// Aggregators. Each throws std::invalid_argument on an empty list; pipelines substitute
// kNeutralScore before calling them.
double aggregate_mean(std::span<const double> scores);
/// Middle order statistic; mean of the two middle values for even lengths.
double aggregate_median(std::span<const double> scores);
double ensemble_average(std::span<const double> per_model_scores);

/// Scores for every face, then for every horizontally flipped face (2n values).
std::vector<double> tta_flip_scores(const ImageScorer& model, std::span<const Image> faces);

double clip_score(double score, double lo = 0.01, double hi = 0.99);

/// Models a pipeline needs: champion uses image_models (the ensemble), dual_branch uses
/// image_models[0] plus video_branch, clip3d uses clip_model.
struct PipelineModels {
  std::vector<std::shared_ptr<const ImageScorer>> image_models;
  std::shared_ptr<const SequenceScorer> video_branch;
  std::shared_ptr<const ClipScorer> clip_model;
};

/// Throws std::invalid_argument when a model the variant needs is missing.
void check_models(const PipelineConfig& cfg, const PipelineModels& models);

/// Per-variant video score before clipping; kNeutralScore for an empty sequence.
double score_face_sequence(const PipelineConfig& cfg, const PipelineModels& models, const FaceSequence& faces);

struct VideoPrediction {
  std::string video_id;
  double score = kNeutralScore;
  double runtime_ms = 0;
};

/// Sample → decode → extract faces → score → clip. Decode failures surface as IoError
/// naming the video id.
VideoPrediction predict_video(const PipelineConfig& cfg, const std::string& video_id, const VideoRef& video,
                              const PipelineModels& models, const DetectorBackend& detector);

struct VideoJob {
  std::string video_id;
  std::filesystem::path path;
  std::shared_ptr<const DetectorBackend> detector;
};

/// Runs predict_video over `jobs` on up to `workers` threads; results follow job order.
std::vector<VideoPrediction> predict_videos(const PipelineConfig& cfg, std::span<const VideoJob> jobs,
                                            const PipelineModels& models, int workers);

}  // namespace forgery
