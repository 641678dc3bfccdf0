#pragma once

// Minimal double-precision layers with hand-written backward passes. Enough for the
// desk-scale backbones; heavy backbones plug in behind the scorer interfaces instead.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forgery/rng.hpp"

namespace forgery::nn {

struct NamedArray {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;

  bool operator==(const NamedArray&) const = default;
};

std::size_t element_count(std::span<const int> shape);

/// Ordered collection of named arrays: model weights, their gradients, optimizer moments.
class ParameterSet {
 public:
  /// Appends a zero-filled array and returns its slot.
  std::size_t add(std::string name, std::vector<int> shape);

  std::size_t size() const { return arrays_.size(); }
  NamedArray& operator[](std::size_t i) { return arrays_[i]; }
  const NamedArray& operator[](std::size_t i) const { return arrays_[i]; }
  auto begin() { return arrays_.begin(); }
  auto end() { return arrays_.end(); }
  auto begin() const { return arrays_.begin(); }
  auto end() const { return arrays_.end(); }

  const NamedArray* find(std::string_view name) const;
  NamedArray* find(std::string_view name);
  /// Throws std::out_of_range when absent.
  const NamedArray& at(std::string_view name) const;

  ParameterSet zeros_like() const;
  void set_zero();
  std::size_t total_elements() const;
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
  void scale(double factor);

  bool operator==(const ParameterSet&) const = default;

 private:
  std::vector<NamedArray> arrays_;
};

/// Dense activation volume laid out [C, T, H, W]; images use T = 1.
struct Tensor {
  int channels = 0;
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c, int t, int h, int w) : channels(c), frames(t), height(h), width(w), data(std::size_t(c) * t * h * w) {}

  std::size_t plane() const { return std::size_t(frames) * height * width; }
  double* channel(int c) { return data.data() + c * plane(); }
  const double* channel(int c) const { return data.data() + c * plane(); }
};

struct Conv3dSpec {
  int in_channels = 3;
  int out_channels = 8;
  std::array<int, 3> kernel{1, 3, 3};   // t, h, w
  std::array<int, 3> stride{1, 1, 1};
  std::array<int, 3> padding{0, 0, 0};

  std::vector<int> weight_shape() const {
    return {out_channels, in_channels, kernel[0], kernel[1], kernel[2]};
  }
  /// Output extents for an input of extents (t, h, w). Throws when the input is too small.
  std::array<int, 3> output_extent(int t, int h, int w) const;
};

void conv3d_forward(const Conv3dSpec& spec, const Tensor& x, std::span<const double> weight,
                    std::span<const double> bias, Tensor& y);

/// Accumulates into dweight/dbias; writes dx when non-null.
void conv3d_backward(const Conv3dSpec& spec, const Tensor& x, std::span<const double> weight, const Tensor& dy,
                     Tensor* dx, std::span<double> dweight, std::span<double> dbias);

inline double sigmoid(double z) {
  if (z >= 0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void silu_inplace(Tensor& x);
/// dx = dy * silu'(pre)
void silu_backward(const Tensor& pre, Tensor& grad);

/// Stack of conv + SiLU layers followed by global average pooling.
class ConvFeatureNet {
 public:
  struct Trace {
    std::vector<Tensor> inputs;  // input to each conv
    std::vector<Tensor> pre;     // conv output before SiLU
  };

  ConvFeatureNet() = default;
  explicit ConvFeatureNet(std::vector<Conv3dSpec> layers);

  /// Registers `<prefix>convK.weight` / `<prefix>convK.bias` in `params`.
  void register_parameters(ParameterSet& params, const std::string& prefix);
  /// He-normal weights, zero biases.
  void initialize(ParameterSet& params, Rng& rng) const;

  int feature_dim() const { return layers_.empty() ? 0 : layers_.back().out_channels; }
  const std::vector<Conv3dSpec>& layers() const { return layers_; }

  std::vector<double> forward(const ParameterSet& params, Tensor input, Trace* trace) const;
  void backward(const ParameterSet& params, const Trace& trace, std::span<const double> dfeatures,
                ParameterSet& grads) const;

 private:
  std::vector<Conv3dSpec> layers_;
  std::vector<std::size_t> weight_slots_;
  std::vector<std::size_t> bias_slots_;
};

}  // namespace forgery::nn
