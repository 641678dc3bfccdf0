#include "forgery/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "forgery/challenge_eval.hpp"
#include "forgery/errors.hpp"
#include "forgery/fixtures.hpp"
#include "forgery/rng.hpp"
#include "forgery/training.hpp"
#include "forgery/video_ingest.hpp"

namespace forgery {

namespace fs = std::filesystem;

std::shared_ptr<const DetectorBackend> detector_for(const fs::path& manifest_path, const ManifestEntry& entry) {
  const fs::path boxes = bbox_fixture_for(manifest_path, entry.video_id);
  if (!fs::exists(boxes)) throw IoError("no face boxes for video " + entry.video_id + " at " + boxes.string());
  return std::make_shared<FixtureDetector>(FixtureDetector::load(boxes));
}

std::optional<fs::path> face_cache_from_env() {
  const char* dir = std::getenv("FORGERY_KIT_CACHE");
  if (!dir || !*dir) return std::nullopt;
  return fs::path(dir);
}

namespace {

// ---- face crop cache: exact float data, one file per (video, extraction parameters) ----

constexpr char kCacheMagic[8] = {'F', 'K', 'F', 'A', 'C', 'E', '1', '\0'};

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool get(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

std::string cache_key(const ManifestEntry& entry, std::size_t n_frames, double crop_factor, int out_size) {
  std::ostringstream key;
  key << fs::absolute(entry.path).lexically_normal().generic_string() << '|' << n_frames << '|' << crop_factor << '|'
      << out_size;
  const std::string text = key.str();
  return sha256_hex({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::optional<FaceSequence> read_face_cache(const fs::path& file, const std::string& video_id) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCacheMagic, 8) != 0) return std::nullopt;
  std::uint64_t count = 0;
  if (!get(in, count)) return std::nullopt;
  FaceSequence seq;
  seq.video_id = video_id;
  for (std::uint64_t i = 0; i < count; ++i) {
    FaceCrop crop;
    std::uint64_t index = 0;
    std::int32_t h = 0, w = 0;
    if (!get(in, index) || !get(in, crop.src_bbox.x) || !get(in, crop.src_bbox.y) || !get(in, crop.src_bbox.w) ||
        !get(in, crop.src_bbox.h) || !get(in, h) || !get(in, w) || h <= 0 || w <= 0)
      return std::nullopt;
    crop.frame_index = static_cast<FrameIndex>(index);
    crop.image = Image(h, w);
    auto px = crop.image.pixels();
    if (!in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size() * sizeof(float))))
      return std::nullopt;
    seq.crops.push_back(std::move(crop));
  }
  return seq;
}

void write_face_cache(const fs::path& file, const FaceSequence& seq) {
  fs::create_directories(file.parent_path());
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(kCacheMagic, 8);
    put(out, static_cast<std::uint64_t>(seq.crops.size()));
    for (const auto& crop : seq.crops) {
      put(out, static_cast<std::uint64_t>(crop.frame_index));
      put(out, crop.src_bbox.x);
      put(out, crop.src_bbox.y);
      put(out, crop.src_bbox.w);
      put(out, crop.src_bbox.h);
      put(out, static_cast<std::int32_t>(crop.image.height()));
      put(out, static_cast<std::int32_t>(crop.image.width()));
      auto px = crop.image.pixels();
      out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size() * sizeof(float)));
    }
    if (!out) throw IoError("cannot write face cache " + tmp.string());
  }
  fs::rename(tmp, file);
}

}  // namespace

FaceSequence extract_entry_faces(const ManifestEntry& entry, const DetectorBackend& detector, std::size_t n_frames,
                                 double crop_factor, int out_size, const std::optional<fs::path>& cache_dir) {
  fs::path cache_file;
  if (cache_dir) {
    cache_file = *cache_dir / (cache_key(entry, n_frames, crop_factor, out_size) + ".faces");
    if (auto cached = read_face_cache(cache_file, entry.video_id)) return *cached;
  }
  const VideoRef video = open_video(entry.path);
  FrameBatch frames;
  try {
    frames = decode_frames(video, sample_frame_indices(video.frame_count, n_frames));
  } catch (const IoError& e) {
    throw IoError("video " + entry.video_id + ": " + e.what());
  }
  FaceSequence seq = extract_face_sequence(frames, detector, crop_factor, out_size, entry.video_id);
  if (cache_dir) write_face_cache(cache_file, seq);
  return seq;
}

namespace {

std::vector<TrainingVideo> gather_training_videos(const RunConfig& cfg, const fs::path& manifest_path,
                                                  std::span<const ManifestEntry> entries, std::size_t n_frames) {
  const auto cache = face_cache_from_env();
  std::vector<TrainingVideo> videos;
  for (const auto& entry : entries) {
    const auto detector = detector_for(manifest_path, entry);
    FaceSequence seq =
        extract_entry_faces(entry, *detector, n_frames, cfg.pipeline.crop_factor, cfg.pipeline.out_size, cache);
    if (seq.crops.empty()) continue;
    videos.push_back({entry.video_id, entry.label, seq.images()});
  }
  return videos;
}

// Faceless videos are dropped before training, which can unbalance the classes again.
std::vector<TrainingVideo> rebalance(std::vector<TrainingVideo> videos, std::uint64_t seed) {
  std::vector<ManifestEntry> proxies;
  for (const auto& v : videos) proxies.push_back({v.video_id, {}, v.label, Split::train, {}});
  const auto kept = balance_downsample(proxies, seed);
  std::vector<TrainingVideo> out;
  std::size_t k = 0;
  for (auto& v : videos)
    if (k < kept.size() && kept[k].video_id == v.video_id) {
      out.push_back(std::move(v));
      ++k;
    }
  return out;
}

void log_epochs(std::ostream* log, const std::string& model, const TrainLog& tl) {
  if (!log) return;
  for (const auto& e : tl.epochs) {
    char line[160];
    std::snprintf(line, sizeof line, "%s epoch %d lr %.6g loss %.6f acc %.4f\n", model.c_str(), e.epoch,
                  e.learning_rate, e.mean_loss, e.accuracy);
    *log << line;
  }
}

}  // namespace

Checkpoint train_pipeline(const RunConfig& cfg, const fs::path& manifest_path, std::uint64_t seed, std::ostream* log) {
  validate(cfg);
  const auto all = load_manifest(manifest_path);
  const auto train_entries = balance_downsample(filter_split(all, Split::train), mix_seed(seed, 1));
  const PipelineConfig& pc = cfg.pipeline;

  std::size_t n_frames = static_cast<std::size_t>(cfg.train.frames_per_video);
  if (pc.variant == PipelineVariant::dual_branch)
    n_frames = std::max(n_frames, static_cast<std::size_t>(cfg.stage2.frames_per_video));
  if (pc.variant == PipelineVariant::clip3d) n_frames = pc.n_frames;
  const auto videos = rebalance(gather_training_videos(cfg, manifest_path, train_entries, n_frames), mix_seed(seed, 2));
  if (videos.empty()) throw std::invalid_argument("no training videos with faces in " + manifest_path.string());

  Checkpoint ckpt;
  ckpt.metadata["variant"] = std::string(to_string(pc.variant));
  ckpt.metadata["config"] = format_run_config(cfg);
  ckpt.metadata["seed"] = std::to_string(seed);

  AugmentPolicy policy = cfg.augment;
  policy.seed = mix_seed(seed, 3);
  switch (pc.variant) {
    case PipelineVariant::champion:
    case PipelineVariant::dual_branch: {
      const std::size_t n_models = pc.variant == PipelineVariant::champion ? cfg.backbones.size() : 1;
      ckpt.metadata["image_models"] = std::to_string(n_models);
      std::vector<ImageClassifier> trained;
      for (std::size_t k = 0; k < n_models; ++k) {
        const BackboneSpec spec = toy_backbone(cfg.backbones[k], pc.out_size);
        AugmentPolicy member_policy = reseeded(policy, 100 + k);
        auto result = train_image_model(cfg.train, spec, videos, member_policy, mix_seed(seed, 10 + k));
        log_epochs(log, spec.name, result.log);
        result.model.save(ckpt, "image" + std::to_string(k) + ".");
        trained.push_back(std::move(result.model));
      }
      if (pc.variant == PipelineVariant::dual_branch) {
        auto stage2 = train_temporal_stage2(trained.front(), cfg.stage2, videos, mix_seed(seed, 20), cfg.attention_hidden);
        log_epochs(log, "attention", stage2.log);
        auto extractor = std::make_shared<const ImageClassifier>(trained.front());
        TemporalAttentionModel(extractor, stage2.params, pc.sequence_length).save(ckpt, "video.");
      }
      break;
    }
    case PipelineVariant::clip3d: {
      auto result = train_video3d_model(cfg.train, pc.clip, videos, policy, mix_seed(seed, 30));
      log_epochs(log, "clip3d", result.log);
      result.model.save(ckpt, "clip.");
      break;
    }
  }
  return ckpt;
}

PipelineModels load_pipeline_models(const Checkpoint& ckpt, PipelineVariant variant) {
  const std::string& stored = ckpt.meta("variant");
  if (stored != to_string(variant))
    throw std::invalid_argument("checkpoint holds a " + stored + " pipeline, not " + std::string(to_string(variant)));
  PipelineModels models;
  if (variant == PipelineVariant::clip3d) {
    models.clip_model = std::make_shared<const Video3dClassifier>(Video3dClassifier::load(ckpt, "clip."));
    return models;
  }
  const int n = std::stoi(ckpt.meta("image_models"));
  std::vector<std::shared_ptr<const ImageClassifier>> images;
  for (int k = 0; k < n; ++k)
    images.push_back(std::make_shared<const ImageClassifier>(ImageClassifier::load(ckpt, "image" + std::to_string(k) + ".")));
  models.image_models.assign(images.begin(), images.end());
  if (variant == PipelineVariant::dual_branch)
    models.video_branch =
        std::make_shared<const TemporalAttentionModel>(TemporalAttentionModel::load(ckpt, "video.", images.front()));
  return models;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

struct CommonOptions {
  std::string config;
  std::string manifest;
  std::string checkpoint;
  std::string out;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string variant;
  std::string split;
};

RunConfig resolve_config(const CommonOptions& o) {
  RunConfig cfg;
  if (!o.config.empty()) {
    cfg = load_run_config(o.config);
    if (!o.variant.empty() && parse_variant(o.variant) != cfg.pipeline.variant)
      throw std::invalid_argument("--variant " + o.variant + " contradicts the config's " +
                                  std::string(to_string(cfg.pipeline.variant)));
  } else {
    cfg = default_run_config(o.variant.empty() ? PipelineVariant::champion : parse_variant(o.variant));
  }
  if (!o.manifest.empty()) cfg.paths.manifest = o.manifest;
  if (!o.checkpoint.empty()) cfg.paths.checkpoint = o.checkpoint;
  if (!o.out.empty()) cfg.paths.output = o.out;
  if (o.seed) cfg.seed = o.seed;
  return cfg;
}

const fs::path& require(const fs::path& p, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string("missing ") + what);
  return p;
}

std::vector<ManifestEntry> select_split(std::vector<ManifestEntry> entries, const std::string& split) {
  if (split.empty() || split == "all") return entries;
  return filter_split(entries, parse_split(split));
}

void cmd_gen_fixtures(const SyntheticSpec& spec, const std::string& out_dir, std::ostream& out) {
  const auto entries = generate_corpus(spec, out_dir);
  out << "wrote " << entries.size() << " videos to " << out_dir << "\n";
}

void cmd_extract_faces(const CommonOptions& o, std::optional<std::size_t> frames, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const fs::path& manifest = require(cfg.paths.manifest, "--manifest");
  const fs::path& dir = require(cfg.paths.output, "--out");
  const auto entries = select_split(load_manifest(manifest), o.split);
  const std::size_t n = frames.value_or(cfg.pipeline.n_frames);
  const auto cache = face_cache_from_env();
  fs::create_directories(dir);
  std::ofstream index(dir / "index.jsonl");
  std::size_t total = 0;
  for (const auto& entry : entries) {
    const auto detector = detector_for(manifest, entry);
    const FaceSequence seq =
        extract_entry_faces(entry, *detector, n, cfg.pipeline.crop_factor, cfg.pipeline.out_size, cache);
    const fs::path vdir = dir / entry.video_id;
    fs::create_directories(vdir);
    std::string frames_json;
    for (const auto& crop : seq.crops) {
      char name[32];
      std::snprintf(name, sizeof name, "face_%05zu.png", crop.frame_index);
      save_png(crop.image, vdir / name);
      frames_json += (frames_json.empty() ? "" : ", ") + std::to_string(crop.frame_index);
    }
    index << "{\"video_id\": \"" << entry.video_id << "\", \"label\": " << entry.label << ", \"split\": \""
          << to_string(entry.split) << "\", \"frames\": [" << frames_json << "]}\n";
    total += seq.crops.size();
  }
  if (!index) throw IoError("cannot write " + (dir / "index.jsonl").string());
  out << "extracted " << total << " faces from " << entries.size() << " videos\n";
}

void cmd_train(const CommonOptions& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  if (!cfg.seed) throw std::invalid_argument("train needs a seed (--seed or config \"seed\")");
  const fs::path& manifest = require(cfg.paths.manifest, "--manifest");
  const fs::path& ckpt_path = require(cfg.paths.checkpoint, "--checkpoint");
  const Checkpoint ckpt = train_pipeline(cfg, manifest, *cfg.seed, &out);
  save_checkpoint(ckpt, ckpt_path);
  out << "saved " << ckpt_path.string() << " sha256 " << file_sha256(ckpt_path) << "\n";
}

void cmd_predict(const CommonOptions& o, std::ostream& out) {
  const fs::path ckpt_path = o.checkpoint;
  if (ckpt_path.empty()) throw std::invalid_argument("missing --checkpoint");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  // Without --config, the pipeline trained into the checkpoint is used as is.
  RunConfig cfg;
  if (o.config.empty()) {
    cfg = parse_run_config(ckpt.meta("config"));
    cfg.paths = {};
    if (!o.variant.empty() && parse_variant(o.variant) != cfg.pipeline.variant)
      throw std::invalid_argument("--variant " + o.variant + " contradicts the checkpoint");
    if (!o.manifest.empty()) cfg.paths.manifest = o.manifest;
    if (!o.out.empty()) cfg.paths.output = o.out;
  } else {
    cfg = resolve_config(o);
  }
  const fs::path& manifest = require(cfg.paths.manifest, "--manifest");
  const fs::path& out_path = require(cfg.paths.output, "--out");
  if (o.workers < 1) throw std::invalid_argument("--workers must be at least 1");
  const PipelineModels models = load_pipeline_models(ckpt, cfg.pipeline.variant);

  const auto entries = select_split(load_manifest(manifest), o.split);
  std::vector<VideoJob> jobs;
  for (const auto& e : entries) jobs.push_back({e.video_id, e.path, detector_for(manifest, e)});
  const auto results = predict_videos(cfg.pipeline, jobs, models, o.workers);
  std::vector<PredictionRecord> preds;
  double runtime_ms = 0;
  for (const auto& r : results) {
    preds.push_back({r.video_id, r.score});
    runtime_ms += r.runtime_ms;
  }
  write_predictions(out_path, preds);
  char line[160];
  std::snprintf(line, sizeof line, "predicted %zu videos in %.1f s\n", preds.size(), runtime_ms / 1000.0);
  out << line;
}

void cmd_evaluate(const std::string& predictions, const std::string& truth_path, double bound,
                  const std::string& manifest, const std::string& split, std::ostream& out) {
  const auto preds = read_predictions(predictions);
  GroundTruthSet truth = read_ground_truth(truth_path);
  if (!manifest.empty()) {
    GroundTruthSet subset;
    for (const auto& e : select_split(load_manifest(manifest), split)) {
      auto it = truth.labels.find(e.video_id);
      if (it == truth.labels.end()) throw std::invalid_argument("no ground truth for " + e.video_id);
      subset.labels.insert(*it);
    }
    truth = std::move(subset);
  }
  const double loss = bce_loss(preds, truth, bound);
  std::size_t correct = 0;
  for (const auto& p : preds) correct += (p.score >= 0.5 ? 1 : 0) == truth.labels.at(p.video_id);
  char line[128];
  std::snprintf(line, sizeof line, "%.6f\n", loss);
  out << line;
  std::snprintf(line, sizeof line, "accuracy %.4f (%zu/%zu)\n", static_cast<double>(correct) / preds.size(), correct,
                preds.size());
  out << line;
}

void cmd_leaderboard(const std::string& entries, const std::string& format, std::ostream& out) {
  const auto ranked = rank_leaderboard(read_leaderboard_entries(entries));
  if (format == "jsonl")
    out << format_leaderboard_jsonl(ranked);
  else if (format == "table")
    out << format_leaderboard(ranked);
  else
    throw std::invalid_argument("unknown leaderboard format: " + format);
}

struct ValidateOptions {
  std::string predictions;
  std::string truth;
  std::string phase = "dev";
  double runtime_s = 0;
  double bound = kDefaultBound;
  std::string ledger;
  std::string team;
  std::int64_t now_s = 0;
  std::int64_t phase_start_s = 0;
};

bool cmd_validate(const ValidateOptions& o, std::ostream& out) {
  const auto preds = read_predictions(o.predictions);
  const GroundTruthSet truth = read_ground_truth(o.truth);
  const PhaseConfig phase = parse_phase(o.phase);
  std::optional<QuotaLedger> ledger;
  QuotaCheck quota;
  if (!o.ledger.empty()) {
    if (o.team.empty()) throw std::invalid_argument("--ledger needs --team");
    ledger.emplace(o.ledger);
    quota = {&*ledger, o.team, o.phase_start_s, o.now_s};
  }
  const ValidationReport report = validate_submission(preds, truth, phase, o.runtime_s, quota);
  if (!report.ok()) {
    for (const auto& m : report.messages()) out << m << "\n";
    return false;
  }
  if (ledger) ledger->record(phase.name, o.team, o.now_s);
  char line[64];
  std::snprintf(line, sizeof line, "%.6f\n", bce_loss(preds, truth, o.bound));
  out << "valid\n" << line;
  return true;
}

void add_common(CLI::App* cmd, CommonOptions& o, bool config, bool checkpoint, bool seed, bool workers) {
  if (config) cmd->add_option("--config", o.config, "Run config (JSON)");
  cmd->add_option("--manifest", o.manifest, "Video manifest (JSONL)");
  if (checkpoint) cmd->add_option("--checkpoint", o.checkpoint, "Model checkpoint");
  cmd->add_option("--out", o.out, "Output path");
  if (seed) cmd->add_option("--seed", o.seed, "Random seed");
  if (workers) cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--variant", o.variant, "Pipeline variant")
      ->check(CLI::IsMember({"champion", "dual_branch", "clip3d"}));
  cmd->add_option("--split", o.split, "Manifest split to use (train, val, test, all)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Face-forgery detection pipelines and challenge evaluation"};
  app.name("forgery_kit");
  app.require_subcommand(1);

  SyntheticSpec spec;
  std::string fixtures_out, artifact = "checkerboard";
  auto* gen = app.add_subcommand("gen-fixtures", "Generate a synthetic video corpus");
  gen->add_option("--out", fixtures_out, "Corpus directory")->required();
  gen->add_option("--seed", spec.seed, "Random seed");
  gen->add_option("--videos", spec.n_videos, "Number of videos");
  gen->add_option("--frames", spec.frames_per_video, "Frames per video");
  gen->add_option("--size", spec.image_size, "Frame size in pixels");
  gen->add_option("--artifact", artifact, "Fake artifact")
      ->check(CLI::IsMember({"checkerboard", "boundary_seam", "none"}));
  gen->add_option("--holdout", spec.holdout_fraction, "Test share per class");
  gen->add_option("--amplitude", spec.artifact_amplitude, "Artifact amplitude");
  gen->add_option("--jitter", spec.appearance_jitter, "Appearance variation between videos, in [0,1]");

  CommonOptions extract_opts;
  std::optional<std::size_t> extract_frames;
  auto* extract = app.add_subcommand("extract-faces", "Crop faces from manifest videos");
  add_common(extract, extract_opts, true, false, false, false);
  extract->add_option("--frames", extract_frames, "Frames sampled per video");

  CommonOptions train_opts;
  auto* train = app.add_subcommand("train", "Train the models of a pipeline variant");
  add_common(train, train_opts, true, true, true, false);

  CommonOptions predict_opts;
  auto* predict = app.add_subcommand("predict", "Score manifest videos");
  add_common(predict, predict_opts, true, true, false, true);

  std::string eval_preds, eval_truth, eval_manifest, eval_split;
  double eval_bound = kDefaultBound;
  auto* evaluate = app.add_subcommand("evaluate", "Bounded BCE loss of a prediction file");
  evaluate->add_option("--predictions", eval_preds, "Prediction file (JSONL)")->required();
  evaluate->add_option("--truth", eval_truth, "Ground truth file (JSONL)")->required();
  evaluate->add_option("--bound", eval_bound, "Prediction bound");
  evaluate->add_option("--manifest", eval_manifest, "Restrict the ground truth to this manifest");
  evaluate->add_option("--split", eval_split, "Manifest split to keep");

  std::string lb_entries, lb_format = "table";
  auto* leaderboard = app.add_subcommand("leaderboard", "Rank teams by BCE loss, then runtime");
  leaderboard->add_option("--entries", lb_entries, "Entries file (JSONL)")->required();
  leaderboard->add_option("--format", lb_format, "table or jsonl");

  ValidateOptions val;
  auto* validate_cmd = app.add_subcommand("validate", "Check a submission against the phase rules");
  validate_cmd->add_option("--predictions", val.predictions, "Prediction file (JSONL)")->required();
  validate_cmd->add_option("--truth", val.truth, "Ground truth file (JSONL)")->required();
  validate_cmd->add_option("--phase", val.phase, "dev or final")->check(CLI::IsMember({"dev", "final"}));
  validate_cmd->add_option("--runtime", val.runtime_s, "Measured runtime in seconds");
  validate_cmd->add_option("--bound", val.bound, "Prediction bound");
  validate_cmd->add_option("--ledger", val.ledger, "Quota ledger file");
  validate_cmd->add_option("--team", val.team, "Submitting team");
  validate_cmd->add_option("--now", val.now_s, "Submission time (unix seconds)");
  validate_cmd->add_option("--phase-start", val.phase_start_s, "Phase start (unix seconds)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      spec.fake_artifact = parse_artifact(artifact);
      cmd_gen_fixtures(spec, fixtures_out, out);
    } else if (*extract) {
      cmd_extract_faces(extract_opts, extract_frames, out);
    } else if (*train) {
      cmd_train(train_opts, out);
    } else if (*predict) {
      cmd_predict(predict_opts, out);
    } else if (*evaluate) {
      cmd_evaluate(eval_preds, eval_truth, eval_bound, eval_manifest, eval_split, out);
    } else if (*leaderboard) {
      cmd_leaderboard(lb_entries, lb_format, out);
    } else if (*validate_cmd) {
      if (!cmd_validate(val, out)) {
        err << "forgery_kit: submission rejected\n";
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "forgery_kit: " << msg << "\n";
    return 1;
  }
  return 0;
}

}  // namespace forgery
