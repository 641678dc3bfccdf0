#include "forgery/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "forgery/losses.hpp"

namespace forgery {

AttentionFusionParams AttentionFusionParams::zeros(int feature_dim, int hidden_dim) {
  if (feature_dim <= 0 || hidden_dim <= 0) throw std::invalid_argument("attention dims must be positive");
  AttentionFusionParams p;
  p.w1 = Eigen::MatrixXd::Zero(feature_dim, hidden_dim);
  p.b1 = Eigen::VectorXd::Zero(hidden_dim);
  p.w2 = Eigen::VectorXd::Zero(hidden_dim);
  p.head_w = Eigen::VectorXd::Zero(feature_dim);
  return p;
}

AttentionFusionParams AttentionFusionParams::random(int feature_dim, int hidden_dim, Rng& rng) {
  AttentionFusionParams p = zeros(feature_dim, hidden_dim);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = rng.normal(0.0, s1);
  for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2[i] = rng.normal(0.0, s2);
  for (Eigen::Index i = 0; i < p.head_w.size(); ++i) p.head_w[i] = rng.normal(0.0, s1);
  return p;
}

void AttentionFusionParams::validate() const {
  const auto d = w1.rows();
  const auto h = w1.cols();
  if (d == 0 || h == 0) throw std::invalid_argument("attention parameters are empty");
  if (b1.size() != h || w2.size() != h || head_w.size() != d)
    throw std::invalid_argument("attention parameter shapes are inconsistent");
  if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !head_w.allFinite() || !std::isfinite(b2) ||
      !std::isfinite(head_b))
    throw std::invalid_argument("attention parameters must be finite");
}

nn::ParameterSet AttentionFusionParams::to_parameters(const std::string& prefix) const {
  validate();
  const int d = feature_dim();
  const int h = hidden_dim();
  nn::ParameterSet ps;
  // w1 is stored row-major as [d, h].
  auto& a = ps[ps.add(prefix + "attention.w1", {d, h})].values;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < h; ++j) a[std::size_t(i) * h + j] = w1(i, j);
  auto& bb1 = ps[ps.add(prefix + "attention.b1", {h})].values;
  Eigen::Map<Eigen::VectorXd>(bb1.data(), h) = b1;
  auto& ww2 = ps[ps.add(prefix + "attention.w2", {h})].values;
  Eigen::Map<Eigen::VectorXd>(ww2.data(), h) = w2;
  ps[ps.add(prefix + "attention.b2", {1})].values[0] = b2;
  auto& hw = ps[ps.add(prefix + "head.weight", {d})].values;
  Eigen::Map<Eigen::VectorXd>(hw.data(), d) = head_w;
  ps[ps.add(prefix + "head.bias", {1})].values[0] = head_b;
  return ps;
}

AttentionFusionParams AttentionFusionParams::from_parameters(const nn::ParameterSet& ps, const std::string& prefix) {
  const auto& a = ps.at(prefix + "attention.w1");
  if (a.shape.size() != 2) throw std::invalid_argument("attention.w1 must be 2-D");
  const int d = a.shape[0];
  const int h = a.shape[1];
  AttentionFusionParams p = zeros(d, h);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < h; ++j) p.w1(i, j) = a.values[std::size_t(i) * h + j];
  auto load_vec = [&](const std::string& name, Eigen::VectorXd& v) {
    const auto& arr = ps.at(prefix + name);
    if (static_cast<Eigen::Index>(arr.values.size()) != v.size())
      throw std::invalid_argument(name + " has the wrong length");
    v = Eigen::Map<const Eigen::VectorXd>(arr.values.data(), v.size());
  };
  load_vec("attention.b1", p.b1);
  load_vec("attention.w2", p.w2);
  load_vec("head.weight", p.head_w);
  p.b2 = ps.at(prefix + "attention.b2").values.at(0);
  p.head_b = ps.at(prefix + "head.bias").values.at(0);
  p.validate();
  return p;
}

namespace {

struct Forward {
  Eigen::MatrixXd hidden;  // T × h, tanh activations
  Eigen::VectorXd weights;
  Eigen::VectorXd fused;
};

// Rows are processed independently and reductions run in an order fixed by the row
// contents, so permuting frames permutes weights bit for bit.
Forward run(const Eigen::MatrixXd& features, const AttentionFusionParams& params) {
  if (features.rows() == 0) throw std::invalid_argument("attention_fuse: need at least one frame");
  if (features.cols() != params.w1.rows()) throw std::invalid_argument("attention_fuse: feature width mismatch");
  const Eigen::Index t_count = features.rows(), d = features.cols(), h = params.w1.cols();
  Forward f;
  f.hidden.resize(t_count, h);
  Eigen::VectorXd scores(t_count);
  for (Eigen::Index t = 0; t < t_count; ++t) {
    double s = params.b2;
    for (Eigen::Index j = 0; j < h; ++j) {
      double pre = params.b1[j];
      for (Eigen::Index i = 0; i < d; ++i) pre += features(t, i) * params.w1(i, j);
      f.hidden(t, j) = std::tanh(pre);
      s += f.hidden(t, j) * params.w2[j];
    }
    scores[t] = s;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(t_count));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    for (Eigen::Index i = 0; i < d; ++i)
      if (features(a, i) != features(b, i)) return features(a, i) < features(b, i);
    return false;
  });

  const double peak = scores.maxCoeff();
  f.weights.resize(t_count);
  for (Eigen::Index t = 0; t < t_count; ++t) f.weights[t] = std::exp(scores[t] - peak);
  double total = 0;
  for (Eigen::Index t : order) total += f.weights[t];
  f.weights /= total;
  f.fused = Eigen::VectorXd::Zero(d);
  for (Eigen::Index t : order)
    for (Eigen::Index i = 0; i < d; ++i) f.fused[i] += f.weights[t] * features(t, i);
  return f;
}

}  // namespace

AttentionOutput attention_fuse(const Eigen::MatrixXd& features, const AttentionFusionParams& params) {
  Forward f = run(features, params);
  return {std::move(f.fused), std::move(f.weights)};
}

double attention_logit(const Eigen::MatrixXd& features, const AttentionFusionParams& params) {
  const Forward f = run(features, params);
  return params.head_w.dot(f.fused) + params.head_b;
}

double attention_loss(const Eigen::MatrixXd& features, const AttentionFusionParams& params, int label,
                      double label_smoothing, AttentionFusionParams* grads) {
  const Forward f = run(features, params);
  const double logit = params.head_w.dot(f.fused) + params.head_b;
  const double target = smoothed_target(label, label_smoothing);
  const double loss = bce_with_logit(logit, target);
  if (!grads) return loss;

  const double g = nn::sigmoid(logit) - target;
  grads->head_w += g * f.fused;
  grads->head_b += g;
  const Eigen::VectorXd dfused = g * params.head_w;
  const Eigen::VectorXd dweights = features * dfused;
  // Softmax Jacobian: ds_t = w_t (dw_t - Σ_k w_k dw_k).
  const Eigen::VectorXd dscores = f.weights.array() * (dweights.array() - f.weights.dot(dweights));
  grads->w2 += f.hidden.transpose() * dscores;
  grads->b2 += dscores.sum();
  const Eigen::MatrixXd dpre =
      ((dscores * params.w2.transpose()).array() * (1.0 - f.hidden.array().square())).matrix();
  grads->w1 += features.transpose() * dpre;
  grads->b1 += dpre.colwise().sum().transpose();
  return loss;
}

}  // namespace forgery
