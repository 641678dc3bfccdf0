#include "forgery/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "forgery/errors.hpp"

namespace forgery {

std::string_view to_string(PipelineVariant variant) {
  switch (variant) {
    case PipelineVariant::champion: return "champion";
    case PipelineVariant::dual_branch: return "dual_branch";
    case PipelineVariant::clip3d: return "clip3d";
  }
  throw std::invalid_argument("unknown pipeline variant");
}

PipelineVariant parse_variant(std::string_view name) {
  for (auto v : {PipelineVariant::champion, PipelineVariant::dual_branch, PipelineVariant::clip3d})
    if (to_string(v) == name) return v;
  throw std::invalid_argument("unknown pipeline variant: " + std::string(name));
}

PipelineConfig champion_pipeline() {
  PipelineConfig c;
  c.variant = PipelineVariant::champion;
  c.n_frames = 15;
  c.crop_factor = 1.2;
  c.out_size = 224;
  c.tta_flip = false;
  return c;
}

PipelineConfig dual_branch_pipeline() {
  PipelineConfig c;
  c.variant = PipelineVariant::dual_branch;
  c.n_frames = 10;
  c.crop_factor = 1.2;
  c.out_size = 320;
  c.tta_flip = true;
  c.sequence_length = 5;
  return c;
}

PipelineConfig clip3d_pipeline() {
  PipelineConfig c;
  c.variant = PipelineVariant::clip3d;
  c.n_frames = 64;
  c.crop_factor = 1.2;
  c.out_size = 112;
  c.clip = ClipSpec::standard(112);
  return c;
}

PipelineConfig default_pipeline(PipelineVariant variant) {
  switch (variant) {
    case PipelineVariant::champion: return champion_pipeline();
    case PipelineVariant::dual_branch: return dual_branch_pipeline();
    case PipelineVariant::clip3d: return clip3d_pipeline();
  }
  throw std::invalid_argument("unknown pipeline variant");
}

void validate(const PipelineConfig& cfg) {
  if (!(cfg.clip_lo >= 0.0 && cfg.clip_lo < cfg.clip_hi && cfg.clip_hi <= 1.0))
    throw std::invalid_argument("clip bounds must satisfy 0 <= lo < hi <= 1");
  if (cfg.n_frames < 1) throw std::invalid_argument("n_frames must be at least 1");
  if (!(cfg.crop_factor >= 1.0)) throw std::invalid_argument("crop_factor must be >= 1");
  if (cfg.out_size <= 0) throw std::invalid_argument("out_size must be positive");
  if (cfg.sequence_length < 1) throw std::invalid_argument("sequence_length must be at least 1");
  if (cfg.variant == PipelineVariant::clip3d) cfg.clip.validate();
}

double aggregate_mean(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("aggregate_mean: no scores");
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

double aggregate_median(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("aggregate_median: no scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double ensemble_average(std::span<const double> per_model_scores) {
  if (per_model_scores.empty()) throw std::invalid_argument("ensemble_average: no model scores");
  return aggregate_mean(per_model_scores);
}

std::vector<double> tta_flip_scores(const ImageScorer& model, std::span<const Image> faces) {
  if (faces.empty()) throw std::invalid_argument("tta_flip_scores: no faces");
  std::vector<double> scores;
  scores.reserve(2 * faces.size());
  for (const auto& f : faces) scores.push_back(model.score(f));
  for (const auto& f : faces) scores.push_back(model.score(flip_horizontal(f)));
  return scores;
}

double clip_score(double score, double lo, double hi) { return std::max(lo, std::min(hi, score)); }

void check_models(const PipelineConfig& cfg, const PipelineModels& models) {
  auto all_set = [](const auto& v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](const auto& p) { return p != nullptr; });
  };
  switch (cfg.variant) {
    case PipelineVariant::champion:
      if (!all_set(models.image_models)) throw std::invalid_argument("champion pipeline needs image models");
      break;
    case PipelineVariant::dual_branch:
      if (!all_set(models.image_models) || !models.video_branch)
        throw std::invalid_argument("dual_branch pipeline needs an image model and a video branch");
      break;
    case PipelineVariant::clip3d:
      if (!models.clip_model) throw std::invalid_argument("clip3d pipeline needs a clip model");
      if (!(models.clip_model->clip_spec() == cfg.clip))
        throw std::invalid_argument("clip model was built for a different clip shape");
      break;
  }
}

double score_face_sequence(const PipelineConfig& cfg, const PipelineModels& models, const FaceSequence& faces) {
  check_models(cfg, models);
  if (faces.crops.empty()) return kNeutralScore;
  const std::vector<Image> images = faces.images();

  switch (cfg.variant) {
    case PipelineVariant::champion: {
      std::vector<double> face_scores;
      face_scores.reserve(images.size());
      std::vector<double> per_model(models.image_models.size());
      for (const auto& img : images) {
        for (std::size_t m = 0; m < per_model.size(); ++m) per_model[m] = models.image_models[m]->score(img);
        face_scores.push_back(ensemble_average(per_model));
      }
      return aggregate_mean(face_scores);
    }
    case PipelineVariant::dual_branch: {
      const ImageScorer& image_model = *models.image_models.front();
      std::vector<double> image_scores;
      if (cfg.tta_flip) {
        image_scores = tta_flip_scores(image_model, images);
      } else {
        for (const auto& img : images) image_scores.push_back(image_model.score(img));
      }
      const double branches[2] = {aggregate_median(image_scores), models.video_branch->score(images)};
      return ensemble_average(branches);
    }
    case PipelineVariant::clip3d:
      return models.clip_model->score(build_clip(images, cfg.clip));
  }
  throw std::invalid_argument("unknown pipeline variant");
}

VideoPrediction predict_video(const PipelineConfig& cfg, const std::string& video_id, const VideoRef& video,
                              const PipelineModels& models, const DetectorBackend& detector) {
  validate(cfg);
  check_models(cfg, models);
  const auto start = std::chrono::steady_clock::now();
  const auto indices = sample_frame_indices(video.frame_count, cfg.n_frames);
  FrameBatch frames;
  try {
    frames = decode_frames(video, indices);
  } catch (const IoError& e) {
    throw IoError("video " + video_id + ": " + e.what());
  }
  const FaceSequence faces = extract_face_sequence(frames, detector, cfg.crop_factor, cfg.out_size, video_id);
  VideoPrediction out;
  out.video_id = video_id;
  out.score = clip_score(score_face_sequence(cfg, models, faces), cfg.clip_lo, cfg.clip_hi);
  out.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<VideoPrediction> predict_videos(const PipelineConfig& cfg, std::span<const VideoJob> jobs,
                                            const PipelineModels& models, int workers) {
  validate(cfg);
  check_models(cfg, models);
  std::vector<VideoPrediction> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const VideoJob& job = jobs[i];
        if (!job.detector) throw std::invalid_argument("video " + job.video_id + " has no detector");
        VideoRef ref;
        try {
          ref = open_video(job.path);
        } catch (const IoError& e) {
          throw IoError("video " + job.video_id + ": " + e.what());
        }
        results[i] = predict_video(cfg, job.video_id, ref, models, *job.detector);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace forgery
