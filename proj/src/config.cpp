#include "forgery/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "forgery/errors.hpp"

namespace forgery {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig default_run_config(PipelineVariant variant) {
  RunConfig cfg;
  cfg.pipeline = default_pipeline(variant);
  switch (variant) {
    case PipelineVariant::champion:
      cfg.train = champion_train_config();
      cfg.stage2 = dual_branch_stage2_config();
      cfg.augment = champion_augment_policy();
      cfg.backbones = {"toy-b0", "toy-b1", "toy-b2"};
      break;
    case PipelineVariant::dual_branch:
      cfg.train = dual_branch_stage1_config();
      cfg.stage2 = dual_branch_stage2_config();
      cfg.augment = dual_branch_augment_policy();
      cfg.backbones = {"toy-b0"};
      break;
    case PipelineVariant::clip3d:
      cfg.train = clip3d_train_config();
      cfg.stage2 = dual_branch_stage2_config();
      cfg.augment = clip3d_augment_policy();
      cfg.backbones = {};
      break;
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  validate(cfg.pipeline);
  validate(cfg.train);
  validate(cfg.stage2);
  validate(cfg.augment);
  if (cfg.attention_hidden < 0) throw std::invalid_argument("attention_hidden must be nonnegative");
  if (cfg.pipeline.variant != PipelineVariant::clip3d && cfg.backbones.empty())
    throw std::invalid_argument("image pipelines need at least one backbone");
  for (const auto& name : cfg.backbones) toy_backbone(name, cfg.pipeline.out_size);
}

namespace {

json clip_json(const ClipSpec& c) {
  return {{"frames", c.frames}, {"height", c.height}, {"width", c.width}, {"reduced", c.reduced}};
}

json pipeline_json(const PipelineConfig& p) {
  return {{"variant", to_string(p.variant)}, {"n_frames", p.n_frames},   {"crop_factor", p.crop_factor},
          {"out_size", p.out_size},          {"tta_flip", p.tta_flip},   {"clip_lo", p.clip_lo},
          {"clip_hi", p.clip_hi},            {"sequence_length", p.sequence_length}, {"clip", clip_json(p.clip)}};
}

json train_json(const TrainConfig& t) {
  return {{"optimizer", to_string(t.optimizer)},
          {"learning_rate", t.learning_rate},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"weight_decay", t.weight_decay},
          {"batch_size", t.batch_size},
          {"epochs", t.epochs},
          {"lr_schedule", to_string(t.lr_schedule)},
          {"label_smoothing", t.label_smoothing},
          {"frames_per_video", t.frames_per_video}};
}

json augment_json(const AugmentPolicy& a) {
  json ops = json::array();
  for (const auto& step : a.extra_ops) ops.push_back({{"op", to_string(step.op)}, {"probability", step.probability}});
  json pool = json::array();
  for (auto op : a.rand_augment_pool) pool.push_back(to_string(op));
  return {{"mixup_probability", a.mixup_probability},
          {"extra_ops", ops},
          {"seed", a.seed},
          {"train_size", a.train_size},
          {"crop_min_scale", a.crop_min_scale},
          {"patch_size", a.patch_size},
          {"patch_sigma", a.patch_sigma},
          {"brightness_delta", a.brightness_delta},
          {"contrast_delta", a.contrast_delta},
          {"jpeg_quality_min", a.jpeg_quality_min},
          {"jpeg_quality_max", a.jpeg_quality_max},
          {"blur_sigma_min", a.blur_sigma_min},
          {"blur_sigma_max", a.blur_sigma_max},
          {"noise_variance_max", a.noise_variance_max},
          {"rand_augment_ops", a.rand_augment_ops},
          {"rand_augment_magnitude", a.rand_augment_magnitude},
          {"rand_augment_pool", pool}};
}

json config_json(const RunConfig& c) {
  json j = {{"pipeline", pipeline_json(c.pipeline)},
            {"train", train_json(c.train)},
            {"stage2", train_json(c.stage2)},
            {"augment", augment_json(c.augment)},
            {"backbones", c.backbones},
            {"attention_hidden", c.attention_hidden},
            {"paths",
             {{"manifest", c.paths.manifest.generic_string()},
              {"checkpoint", c.paths.checkpoint.generic_string()},
              {"output", c.paths.output.generic_string()},
              {"truth", c.paths.truth.generic_string()}}},
            {"seed", nullptr}};
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

ClipSpec clip_from(const json& j) {
  return {j.at("frames").get<int>(), j.at("height").get<int>(), j.at("width").get<int>(), j.at("reduced").get<bool>()};
}

PipelineConfig pipeline_from(const json& j) {
  PipelineConfig p;
  p.variant = parse_variant(j.at("variant").get<std::string>());
  p.n_frames = j.at("n_frames").get<std::size_t>();
  p.crop_factor = j.at("crop_factor").get<double>();
  p.out_size = j.at("out_size").get<int>();
  p.tta_flip = j.at("tta_flip").get<bool>();
  p.clip_lo = j.at("clip_lo").get<double>();
  p.clip_hi = j.at("clip_hi").get<double>();
  p.sequence_length = j.at("sequence_length").get<int>();
  p.clip = clip_from(j.at("clip"));
  return p;
}

TrainConfig train_from(const json& j) {
  TrainConfig t;
  t.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  t.learning_rate = j.at("learning_rate").get<double>();
  t.beta1 = j.at("beta1").get<double>();
  t.beta2 = j.at("beta2").get<double>();
  t.weight_decay = j.at("weight_decay").get<double>();
  t.batch_size = j.at("batch_size").get<int>();
  t.epochs = j.at("epochs").get<int>();
  t.lr_schedule = parse_lr_schedule(j.at("lr_schedule").get<std::string>());
  t.label_smoothing = j.at("label_smoothing").get<double>();
  t.frames_per_video = j.at("frames_per_video").get<int>();
  return t;
}

AugmentPolicy augment_from(const json& j) {
  AugmentPolicy a;
  a.mixup_probability = j.at("mixup_probability").get<double>();
  a.extra_ops.clear();
  for (const auto& step : j.at("extra_ops"))
    a.extra_ops.push_back({parse_augment_op(step.at("op").get<std::string>()), step.at("probability").get<double>()});
  a.seed = j.at("seed").get<std::uint64_t>();
  a.train_size = j.at("train_size").get<int>();
  a.crop_min_scale = j.at("crop_min_scale").get<double>();
  a.patch_size = j.at("patch_size").get<int>();
  a.patch_sigma = j.at("patch_sigma").get<double>();
  a.brightness_delta = j.at("brightness_delta").get<double>();
  a.contrast_delta = j.at("contrast_delta").get<double>();
  a.jpeg_quality_min = j.at("jpeg_quality_min").get<int>();
  a.jpeg_quality_max = j.at("jpeg_quality_max").get<int>();
  a.blur_sigma_min = j.at("blur_sigma_min").get<double>();
  a.blur_sigma_max = j.at("blur_sigma_max").get<double>();
  a.noise_variance_max = j.at("noise_variance_max").get<double>();
  a.rand_augment_ops = j.at("rand_augment_ops").get<int>();
  a.rand_augment_magnitude = j.at("rand_augment_magnitude").get<double>();
  a.rand_augment_pool.clear();
  for (const auto& op : j.at("rand_augment_pool")) a.rand_augment_pool.push_back(parse_augment_op(op.get<std::string>()));
  return a;
}

fs::path resolve(const std::string& p, const fs::path& base) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

// Rejects keys the defaults do not know about, so typos do not pass silently.
void check_known_keys(const json& input, const json& defaults, const std::string& where) {
  for (const auto& [key, value] : input.items()) {
    if (!defaults.contains(key)) throw ParseError("unknown config key: " + where + key, 0);
    const json& def = defaults.at(key);
    if (value.is_object() && def.is_object()) check_known_keys(value, def, where + key + ".");
  }
}

}  // namespace

std::string format_run_config(const RunConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  json input;
  try {
    input = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  if (!input.is_object()) throw ParseError("config must be a JSON object", 0);

  PipelineVariant variant = PipelineVariant::champion;
  if (input.contains("pipeline") && input["pipeline"].contains("variant"))
    variant = parse_variant(input["pipeline"]["variant"].get<std::string>());
  json merged = config_json(default_run_config(variant));
  check_known_keys(input, merged, "");
  merged.merge_patch(input);

  try {
    RunConfig cfg;
    cfg.pipeline = pipeline_from(merged.at("pipeline"));
    cfg.train = train_from(merged.at("train"));
    cfg.stage2 = train_from(merged.at("stage2"));
    cfg.augment = augment_from(merged.at("augment"));
    cfg.backbones = merged.at("backbones").get<std::vector<std::string>>();
    cfg.attention_hidden = merged.at("attention_hidden").get<int>();
    const json& paths = merged.at("paths");
    cfg.paths.manifest = resolve(paths.value("manifest", ""), base_dir);
    cfg.paths.checkpoint = resolve(paths.value("checkpoint", ""), base_dir);
    cfg.paths.output = resolve(paths.value("output", ""), base_dir);
    cfg.paths.truth = resolve(paths.value("truth", ""), base_dir);
    if (merged.contains("seed") && !merged["seed"].is_null()) cfg.seed = merged["seed"].get<std::uint64_t>();
    validate(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad config value: ") + e.what(), 0);
  }
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

void save_run_config(const fs::path& path, const RunConfig& cfg) {
  std::ofstream out(path);
  out << format_run_config(cfg);
  if (!out) throw IoError("cannot write config " + path.string());
}

}  // namespace forgery
