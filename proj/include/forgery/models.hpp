#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "forgery/attention.hpp"
#include "forgery/checkpoint.hpp"
#include "forgery/image.hpp"
#include "forgery/nn.hpp"

namespace forgery {

// ---------------------------------------------------------------------------
// Scorer interfaces. Pipelines only see these, so heavy external backbones and
// test stubs plug in the same way as the in-repo toy networks.
// ---------------------------------------------------------------------------

/// Probability that one face crop is fake.
class ImageScorer {
 public:
  virtual ~ImageScorer() = default;
  virtual double score(const Image& face) const = 0;
};

/// Probability that a face sequence (one video) is fake.
class SequenceScorer {
 public:
  virtual ~SequenceScorer() = default;
  virtual double score(std::span<const Image> faces) const = 0;
};

struct ClipSpec {
  int frames = 64;
  int height = 112;
  int width = 112;
  /// Reduced clips (fewer frames, other sizes) are accepted only when flagged.
  bool reduced = false;

  static ClipSpec standard(int size);
  static ClipSpec reduced_for_tests(int frames, int size);
  /// Throws std::invalid_argument for shapes outside {64}×{224², 112²} unless reduced.
  void validate() const;
  bool operator==(const ClipSpec&) const = default;
};

/// Probability that a face clip (T frames at the clip spec's size) is fake.
class ClipScorer {
 public:
  virtual ~ClipScorer() = default;
  virtual const ClipSpec& clip_spec() const = 0;
  virtual double score(std::span<const Image> clip) const = 0;
};

/// Temporal nearest-neighbour resampling of the faces to spec.frames, then spatial resize.
/// Faces must be nonempty.
std::vector<Image> build_clip(std::span<const Image> faces, const ClipSpec& spec);

// ---------------------------------------------------------------------------
// Toy image classifier: conv stem (4×4, stride 4) + three 3×3 stride-2 convs, SiLU,
// global average pooling to feature_dim, linear head, sigmoid.
// ---------------------------------------------------------------------------

struct BackboneSpec {
  std::string name = "toy-b0";
  int feature_dim = 64;
  int input_size = 224;
  std::vector<int> widths = {8, 16, 32};  // stem and middle stages

  /// Throws std::invalid_argument unless feature_dim > 0 and input_size ∈ {112, 224, 320}.
  void validate() const;
  bool operator==(const BackboneSpec&) const = default;
};

/// toy-b0, toy-b1, toy-b2: the ensemble members (progressively wider).
BackboneSpec toy_backbone(const std::string& name, int input_size);

class ImageClassifier final : public ImageScorer {
 public:
  ImageClassifier(BackboneSpec spec, std::uint64_t seed);

  const BackboneSpec& spec() const { return spec_; }
  const nn::ParameterSet& parameters() const { return params_; }
  nn::ParameterSet& parameters() { return params_; }

  /// Throws std::invalid_argument unless the image is input_size².
  std::vector<double> features(const Image& face) const;
  double logit(const Image& face) const;
  double score(const Image& face) const override;
  /// One probability in [0,1] per image.
  std::vector<double> predict(std::span<const Image> faces) const;

  /// Loss of one sample against a soft target; adds the parameter gradient to `grads`
  /// (same layout as parameters()). Returns the loss; the logit goes to `logit_out`.
  double accumulate_gradient(const Image& face, double target, nn::ParameterSet& grads,
                             double* logit_out = nullptr) const;

  void save(Checkpoint& ckpt, const std::string& prefix) const;
  static ImageClassifier load(const Checkpoint& ckpt, const std::string& prefix);

 private:
  nn::Tensor to_input(const Image& face) const;

  BackboneSpec spec_;
  nn::ConvFeatureNet trunk_;
  nn::ParameterSet params_;
  std::size_t head_w_ = 0;
  std::size_t head_b_ = 0;
};

/// Video branch: frozen image features for an evenly spaced face subsequence, fused by
/// temporal attention, then the linear head.
class TemporalAttentionModel final : public SequenceScorer {
 public:
  TemporalAttentionModel(std::shared_ptr<const ImageClassifier> extractor, AttentionFusionParams params,
                         int sequence_length = 5);

  const ImageClassifier& extractor() const { return *extractor_; }
  const AttentionFusionParams& params() const { return params_; }
  int sequence_length() const { return sequence_length_; }

  /// T × d feature rows for the selected frames. Throws on an empty sequence.
  Eigen::MatrixXd sequence_features(std::span<const Image> faces) const;
  double score(std::span<const Image> faces) const override;

  void save(Checkpoint& ckpt, const std::string& prefix) const;
  static TemporalAttentionModel load(const Checkpoint& ckpt, const std::string& prefix,
                                     std::shared_ptr<const ImageClassifier> extractor);

 private:
  std::shared_ptr<const ImageClassifier> extractor_;
  AttentionFusionParams params_;
  int sequence_length_;
};

/// Rows of features(faces[i]) for i = floor(k·n/len), k < len (all faces when n < len).
Eigen::MatrixXd select_sequence_features(const ImageClassifier& extractor, std::span<const Image> faces,
                                         int sequence_length);

// ---------------------------------------------------------------------------
// Toy 3D network: factorized spatial (1×k×k) and temporal (3×1×1) convolutions.
// ---------------------------------------------------------------------------

class Video3dClassifier final : public ClipScorer {
 public:
  Video3dClassifier(ClipSpec spec, std::uint64_t seed);

  const ClipSpec& clip_spec() const override { return spec_; }
  const nn::ParameterSet& parameters() const { return params_; }
  nn::ParameterSet& parameters() { return params_; }

  /// Throws std::invalid_argument unless the clip matches the clip spec exactly.
  double logit(std::span<const Image> clip) const;
  double score(std::span<const Image> clip) const override;
  double accumulate_gradient(std::span<const Image> clip, double target, nn::ParameterSet& grads,
                             double* logit_out = nullptr) const;

  void save(Checkpoint& ckpt, const std::string& prefix) const;
  static Video3dClassifier load(const Checkpoint& ckpt, const std::string& prefix);

 private:
  nn::Tensor to_input(std::span<const Image> clip) const;

  ClipSpec spec_;
  nn::ConvFeatureNet trunk_;
  nn::ParameterSet params_;
  std::size_t head_w_ = 0;
  std::size_t head_b_ = 0;
};

}  // namespace forgery
