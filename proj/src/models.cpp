#include "forgery/models.hpp"

#include <stdexcept>

#include "forgery/losses.hpp"
#include "forgery/video_ingest.hpp"

namespace forgery {

namespace {

// Inputs are centred on mid-gray and scaled so unit-range pixels span [-2, 2].
constexpr double kInputScale = 4.0;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void init_head(nn::ParameterSet& params, std::size_t w, Rng& rng) {
  const double stddev = 1.0 / std::sqrt(static_cast<double>(params[w].values.size()));
  for (double& v : params[w].values) v = rng.normal(0.0, stddev);
}

void copy_matching(nn::ParameterSet& dst, const nn::ParameterSet& src) {
  for (auto& a : dst) {
    const auto& s = src.at(a.name);
    if (s.shape != a.shape) throw std::invalid_argument("checkpoint array has the wrong shape: " + a.name);
    a.values = s.values;
  }
}

}  // namespace

// ---- clip spec ----

ClipSpec ClipSpec::standard(int size) {
  ClipSpec s{64, size, size, false};
  s.validate();
  return s;
}

ClipSpec ClipSpec::reduced_for_tests(int frames, int size) { return ClipSpec{frames, size, size, true}; }

void ClipSpec::validate() const {
  if (frames <= 0 || height <= 0 || width <= 0) throw std::invalid_argument("clip extents must be positive");
  if (reduced) return;
  if (frames != 64) throw std::invalid_argument("clip must hold 64 frames");
  if (!((height == 224 && width == 224) || (height == 112 && width == 112)))
    throw std::invalid_argument("clip frames must be 224x224 or 112x112");
}

std::vector<Image> build_clip(std::span<const Image> faces, const ClipSpec& spec) {
  spec.validate();
  if (faces.empty()) throw std::invalid_argument("build_clip: no faces");
  std::vector<Image> clip;
  clip.reserve(spec.frames);
  const std::size_t n = faces.size();
  for (int t = 0; t < spec.frames; ++t) {
    const std::size_t src = static_cast<std::size_t>(t) * n / static_cast<std::size_t>(spec.frames);
    clip.push_back(resize_bilinear(faces[src], spec.height, spec.width));
  }
  return clip;
}

// ---- image classifier ----

void BackboneSpec::validate() const {
  if (feature_dim <= 0) throw std::invalid_argument("feature_dim must be positive");
  if (input_size != 112 && input_size != 224 && input_size != 320)
    throw std::invalid_argument("input_size must be 112, 224 or 320");
  if (widths.size() != 3) throw std::invalid_argument("toy backbone takes three stage widths");
  for (int w : widths)
    if (w <= 0) throw std::invalid_argument("stage widths must be positive");
}

BackboneSpec toy_backbone(const std::string& name, int input_size) {
  BackboneSpec s;
  s.name = name;
  s.input_size = input_size;
  if (name == "toy-b0") s.widths = {8, 16, 32};
  else if (name == "toy-b1") s.widths = {8, 16, 48};
  else if (name == "toy-b2") s.widths = {12, 24, 48};
  else throw std::invalid_argument("unknown toy backbone: " + name);
  s.validate();
  return s;
}

namespace {

std::vector<nn::Conv3dSpec> image_trunk(const BackboneSpec& s) {
  auto conv = [](int in, int out, int k, int stride, int pad) {
    nn::Conv3dSpec c;
    c.in_channels = in;
    c.out_channels = out;
    c.kernel = {1, k, k};
    c.stride = {1, stride, stride};
    c.padding = {0, pad, pad};
    return c;
  };
  return {conv(3, s.widths[0], 4, 4, 0), conv(s.widths[0], s.widths[1], 3, 2, 1),
          conv(s.widths[1], s.widths[2], 3, 2, 1), conv(s.widths[2], s.feature_dim, 3, 2, 1)};
}

}  // namespace

ImageClassifier::ImageClassifier(BackboneSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  trunk_ = nn::ConvFeatureNet(image_trunk(spec_));
  trunk_.register_parameters(params_, "");
  head_w_ = params_.add("head.weight", {spec_.feature_dim});
  head_b_ = params_.add("head.bias", {1});
  Rng rng(seed);
  trunk_.initialize(params_, rng);
  init_head(params_, head_w_, rng);
}

nn::Tensor ImageClassifier::to_input(const Image& face) const {
  if (face.height() != spec_.input_size || face.width() != spec_.input_size)
    throw std::invalid_argument("image classifier expects " + std::to_string(spec_.input_size) + "x" +
                                std::to_string(spec_.input_size) + " input, got " + std::to_string(face.height()) +
                                "x" + std::to_string(face.width()));
  const int s = spec_.input_size;
  nn::Tensor x(3, 1, s, s);
  for (int c = 0; c < 3; ++c) {
    double* xc = x.channel(c);
    for (int y = 0; y < s; ++y)
      for (int i = 0; i < s; ++i) xc[y * s + i] = (face.at(y, i, c) - 0.5) * kInputScale;
  }
  return x;
}

std::vector<double> ImageClassifier::features(const Image& face) const {
  return trunk_.forward(params_, to_input(face), nullptr);
}

double ImageClassifier::logit(const Image& face) const {
  return dot(features(face), params_[head_w_].values) + params_[head_b_].values[0];
}

double ImageClassifier::score(const Image& face) const { return nn::sigmoid(logit(face)); }

std::vector<double> ImageClassifier::predict(std::span<const Image> faces) const {
  std::vector<double> out;
  out.reserve(faces.size());
  for (const auto& f : faces) out.push_back(score(f));
  return out;
}

double ImageClassifier::accumulate_gradient(const Image& face, double target, nn::ParameterSet& grads,
                                            double* logit_out) const {
  nn::ConvFeatureNet::Trace trace;
  const auto feat = trunk_.forward(params_, to_input(face), &trace);
  const auto& hw = params_[head_w_].values;
  const double z = dot(feat, hw) + params_[head_b_].values[0];
  if (logit_out) *logit_out = z;
  const double g = nn::sigmoid(z) - target;
  std::vector<double> dfeat(feat.size());
  for (std::size_t i = 0; i < feat.size(); ++i) {
    grads[head_w_].values[i] += g * feat[i];
    dfeat[i] = g * hw[i];
  }
  grads[head_b_].values[0] += g;
  trunk_.backward(params_, trace, dfeat, grads);
  return bce_with_logit(z, target);
}

void ImageClassifier::save(Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.metadata[prefix + "kind"] = "image_classifier";
  ckpt.metadata[prefix + "backbone"] = spec_.name;
  ckpt.metadata[prefix + "input_size"] = std::to_string(spec_.input_size);
  ckpt.metadata[prefix + "feature_dim"] = std::to_string(spec_.feature_dim);
  std::string widths;
  for (int w : spec_.widths) widths += (widths.empty() ? "" : ",") + std::to_string(w);
  ckpt.metadata[prefix + "widths"] = widths;
  ckpt.add_arrays(params_, prefix);
}

ImageClassifier ImageClassifier::load(const Checkpoint& ckpt, const std::string& prefix) {
  if (ckpt.meta(prefix + "kind") != "image_classifier")
    throw std::invalid_argument("checkpoint entry " + prefix + " is not an image classifier");
  BackboneSpec spec;
  spec.name = ckpt.meta(prefix + "backbone");
  spec.input_size = std::stoi(ckpt.meta(prefix + "input_size"));
  spec.feature_dim = std::stoi(ckpt.meta(prefix + "feature_dim"));
  spec.widths.clear();
  const std::string& widths = ckpt.meta(prefix + "widths");
  for (std::size_t pos = 0; pos < widths.size();) {
    std::size_t next = widths.find(',', pos);
    if (next == std::string::npos) next = widths.size();
    spec.widths.push_back(std::stoi(widths.substr(pos, next - pos)));
    pos = next + 1;
  }
  ImageClassifier model(spec, 0);
  copy_matching(model.params_, ckpt.arrays_with_prefix(prefix));
  return model;
}

// ---- temporal model ----

Eigen::MatrixXd select_sequence_features(const ImageClassifier& extractor, std::span<const Image> faces,
                                         int sequence_length) {
  if (faces.empty()) throw std::invalid_argument("face sequence is empty");
  if (sequence_length <= 0) throw std::invalid_argument("sequence_length must be positive");
  const auto picks = sample_frame_indices(faces.size(), static_cast<std::size_t>(sequence_length));
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(picks.size()), extractor.spec().feature_dim);
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const auto f = extractor.features(faces[picks[i]]);
    rows.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), f.size());
  }
  return rows;
}

TemporalAttentionModel::TemporalAttentionModel(std::shared_ptr<const ImageClassifier> extractor,
                                               AttentionFusionParams params, int sequence_length)
    : extractor_(std::move(extractor)), params_(std::move(params)), sequence_length_(sequence_length) {
  if (!extractor_) throw std::invalid_argument("temporal model needs a feature extractor");
  params_.validate();
  if (params_.feature_dim() != extractor_->spec().feature_dim)
    throw std::invalid_argument("attention width does not match the extractor's feature_dim");
  if (sequence_length_ <= 0) throw std::invalid_argument("sequence_length must be positive");
}

Eigen::MatrixXd TemporalAttentionModel::sequence_features(std::span<const Image> faces) const {
  return select_sequence_features(*extractor_, faces, sequence_length_);
}

double TemporalAttentionModel::score(std::span<const Image> faces) const {
  return nn::sigmoid(attention_logit(sequence_features(faces), params_));
}

void TemporalAttentionModel::save(Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.metadata[prefix + "kind"] = "temporal_attention";
  ckpt.metadata[prefix + "sequence_length"] = std::to_string(sequence_length_);
  ckpt.add_arrays(params_.to_parameters(), prefix);
}

TemporalAttentionModel TemporalAttentionModel::load(const Checkpoint& ckpt, const std::string& prefix,
                                                   std::shared_ptr<const ImageClassifier> extractor) {
  if (ckpt.meta(prefix + "kind") != "temporal_attention")
    throw std::invalid_argument("checkpoint entry " + prefix + " is not a temporal attention model");
  return TemporalAttentionModel(std::move(extractor),
                                AttentionFusionParams::from_parameters(ckpt.arrays_with_prefix(prefix)),
                                std::stoi(ckpt.meta(prefix + "sequence_length")));
}

// ---- 3D network ----

namespace {

std::vector<nn::Conv3dSpec> clip_trunk() {
  auto spatial = [](int in, int out, int k, int stride, int pad) {
    nn::Conv3dSpec c;
    c.in_channels = in;
    c.out_channels = out;
    c.kernel = {1, k, k};
    c.stride = {1, stride, stride};
    c.padding = {0, pad, pad};
    return c;
  };
  auto temporal = [](int ch, int stride) {
    nn::Conv3dSpec c;
    c.in_channels = ch;
    c.out_channels = ch;
    c.kernel = {3, 1, 1};
    c.stride = {stride, 1, 1};
    c.padding = {1, 0, 0};
    return c;
  };
  return {spatial(3, 8, 4, 4, 0), temporal(8, 2), spatial(8, 16, 3, 2, 1), temporal(16, 2),
          spatial(16, 32, 3, 2, 1)};
}

}  // namespace

Video3dClassifier::Video3dClassifier(ClipSpec spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  trunk_ = nn::ConvFeatureNet(clip_trunk());
  trunk_.register_parameters(params_, "");
  head_w_ = params_.add("head.weight", {trunk_.feature_dim()});
  head_b_ = params_.add("head.bias", {1});
  Rng rng(seed);
  trunk_.initialize(params_, rng);
  init_head(params_, head_w_, rng);
}

nn::Tensor Video3dClassifier::to_input(std::span<const Image> clip) const {
  if (static_cast<int>(clip.size()) != spec_.frames)
    throw std::invalid_argument("clip must hold " + std::to_string(spec_.frames) + " frames, got " +
                                std::to_string(clip.size()));
  const int h = spec_.height;
  const int w = spec_.width;
  nn::Tensor x(3, spec_.frames, h, w);
  for (int t = 0; t < spec_.frames; ++t) {
    const Image& frame = clip[t];
    if (frame.height() != h || frame.width() != w) throw std::invalid_argument("clip frame has the wrong size");
    for (int c = 0; c < 3; ++c) {
      double* xc = x.channel(c) + std::size_t(t) * h * w;
      for (int y = 0; y < h; ++y)
        for (int i = 0; i < w; ++i) xc[y * w + i] = (frame.at(y, i, c) - 0.5) * kInputScale;
    }
  }
  return x;
}

double Video3dClassifier::logit(std::span<const Image> clip) const {
  const auto feat = trunk_.forward(params_, to_input(clip), nullptr);
  return dot(feat, params_[head_w_].values) + params_[head_b_].values[0];
}

double Video3dClassifier::score(std::span<const Image> clip) const { return nn::sigmoid(logit(clip)); }

double Video3dClassifier::accumulate_gradient(std::span<const Image> clip, double target, nn::ParameterSet& grads,
                                              double* logit_out) const {
  nn::ConvFeatureNet::Trace trace;
  const auto feat = trunk_.forward(params_, to_input(clip), &trace);
  const auto& hw = params_[head_w_].values;
  const double z = dot(feat, hw) + params_[head_b_].values[0];
  if (logit_out) *logit_out = z;
  const double g = nn::sigmoid(z) - target;
  std::vector<double> dfeat(feat.size());
  for (std::size_t i = 0; i < feat.size(); ++i) {
    grads[head_w_].values[i] += g * feat[i];
    dfeat[i] = g * hw[i];
  }
  grads[head_b_].values[0] += g;
  trunk_.backward(params_, trace, dfeat, grads);
  return bce_with_logit(z, target);
}

void Video3dClassifier::save(Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.metadata[prefix + "kind"] = "video3d";
  ckpt.metadata[prefix + "clip_frames"] = std::to_string(spec_.frames);
  ckpt.metadata[prefix + "clip_height"] = std::to_string(spec_.height);
  ckpt.metadata[prefix + "clip_width"] = std::to_string(spec_.width);
  ckpt.metadata[prefix + "clip_reduced"] = spec_.reduced ? "1" : "0";
  ckpt.add_arrays(params_, prefix);
}

Video3dClassifier Video3dClassifier::load(const Checkpoint& ckpt, const std::string& prefix) {
  if (ckpt.meta(prefix + "kind") != "video3d")
    throw std::invalid_argument("checkpoint entry " + prefix + " is not a 3D clip model");
  ClipSpec spec;
  spec.frames = std::stoi(ckpt.meta(prefix + "clip_frames"));
  spec.height = std::stoi(ckpt.meta(prefix + "clip_height"));
  spec.width = std::stoi(ckpt.meta(prefix + "clip_width"));
  spec.reduced = ckpt.meta(prefix + "clip_reduced") == "1";
  Video3dClassifier model(spec, 0);
  copy_matching(model.params_, ckpt.arrays_with_prefix(prefix));
  return model;
}

}  // namespace forgery
