#pragma once

#include <Eigen/Dense>

#include "forgery/nn.hpp"
#include "forgery/rng.hpp"

namespace forgery {

/// Temporal attention over per-frame features plus the linear classification head.
///   score_t = w2 · tanh(w1ᵀ f_t + b1) + b2,  weights = softmax_t(score),
///   fused   = Σ_t weights_t f_t,             logit   = head_w · fused + head_b.
struct AttentionFusionParams {
  Eigen::MatrixXd w1;  // d × h
  Eigen::VectorXd b1;  // h
  Eigen::VectorXd w2;  // h
  double b2 = 0.0;
  Eigen::VectorXd head_w;  // d
  double head_b = 0.0;

  int feature_dim() const { return static_cast<int>(w1.rows()); }
  int hidden_dim() const { return static_cast<int>(w1.cols()); }

  static AttentionFusionParams zeros(int feature_dim, int hidden_dim);
  static AttentionFusionParams random(int feature_dim, int hidden_dim, Rng& rng);

  /// Throws std::invalid_argument on inconsistent shapes or non-finite entries.
  void validate() const;

  /// Arrays named attention.w1 / .b1 / .w2 / .b2 / head.weight / head.bias, prefixed.
  nn::ParameterSet to_parameters(const std::string& prefix = {}) const;
  static AttentionFusionParams from_parameters(const nn::ParameterSet& params, const std::string& prefix = {});
};

struct AttentionOutput {
  Eigen::VectorXd fused;    // d
  Eigen::VectorXd weights;  // T, nonnegative, sums to 1
};

/// features is T × d (one row per frame). Throws std::invalid_argument when T = 0 or the
/// width does not match the parameters.
AttentionOutput attention_fuse(const Eigen::MatrixXd& features, const AttentionFusionParams& params);

double attention_logit(const Eigen::MatrixXd& features, const AttentionFusionParams& params);

/// Smoothed-BCE loss of sigmoid(logit) for one sequence. When `grads` is non-null,
/// adds the loss gradient for every parameter (same layout as `params`).
double attention_loss(const Eigen::MatrixXd& features, const AttentionFusionParams& params, int label,
                      double label_smoothing, AttentionFusionParams* grads);

}  // namespace forgery
