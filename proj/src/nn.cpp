#include "forgery/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace forgery::nn {

std::size_t element_count(std::span<const int> shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative array extent");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::size_t ParameterSet::add(std::string name, std::vector<int> shape) {
  if (find(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  NamedArray a;
  a.name = std::move(name);
  a.values.assign(element_count(shape), 0.0);
  a.shape = std::move(shape);
  arrays_.push_back(std::move(a));
  return arrays_.size() - 1;
}

const NamedArray* ParameterSet::find(std::string_view name) const {
  for (const auto& a : arrays_)
    if (a.name == name) return &a;
  return nullptr;
}

NamedArray* ParameterSet::find(std::string_view name) {
  for (auto& a : arrays_)
    if (a.name == name) return &a;
  return nullptr;
}

const NamedArray& ParameterSet::at(std::string_view name) const {
  if (const auto* a = find(name)) return *a;
  throw std::out_of_range("no parameter named " + std::string(name));
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out = *this;
  out.set_zero();
  return out;
}

void ParameterSet::set_zero() {
  for (auto& a : arrays_) std::fill(a.values.begin(), a.values.end(), 0.0);
}

std::size_t ParameterSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& a : arrays_) n += a.values.size();
  return n;
}

std::vector<double> ParameterSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(total_elements());
  for (const auto& a : arrays_) flat.insert(flat.end(), a.values.begin(), a.values.end());
  return flat;
}

void ParameterSet::assign_flat(std::span<const double> flat) {
  if (flat.size() != total_elements()) throw std::invalid_argument("assign_flat: size mismatch");
  std::size_t off = 0;
  for (auto& a : arrays_) {
    std::copy_n(flat.begin() + off, a.values.size(), a.values.begin());
    off += a.values.size();
  }
}

void ParameterSet::scale(double factor) {
  for (auto& a : arrays_)
    for (double& v : a.values) v *= factor;
}

// ---- convolution ----

std::array<int, 3> Conv3dSpec::output_extent(int t, int h, int w) const {
  const std::array<int, 3> in{t, h, w};
  std::array<int, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const int span = in[i] + 2 * padding[i] - kernel[i];
    if (span < 0 || stride[i] <= 0) throw std::invalid_argument("conv3d: input smaller than kernel");
    out[i] = span / stride[i] + 1;
  }
  return out;
}

namespace {

// Output positions o in [lo, hi) whose input coordinate o*stride - pad + k lies in [0, n).
std::pair<int, int> valid_range(int out_n, int in_n, int stride, int pad, int k) {
  int lo = 0;
  while (lo < out_n && lo * stride - pad + k < 0) ++lo;
  int hi = out_n;
  while (hi > lo && (hi - 1) * stride - pad + k >= in_n) --hi;
  return {lo, hi};
}

void check_input(const Conv3dSpec& spec, const Tensor& x, std::span<const double> weight) {
  if (x.channels != spec.in_channels) throw std::invalid_argument("conv3d: channel mismatch");
  if (weight.size() != element_count(spec.weight_shape())) throw std::invalid_argument("conv3d: weight size mismatch");
}

}  // namespace

void conv3d_forward(const Conv3dSpec& spec, const Tensor& x, std::span<const double> weight,
                    std::span<const double> bias, Tensor& y) {
  check_input(spec, x, weight);
  const auto [ot_n, oh_n, ow_n] = spec.output_extent(x.frames, x.height, x.width);
  y = Tensor(spec.out_channels, ot_n, oh_n, ow_n);
  const auto [kt_n, kh_n, kw_n] = spec.kernel;
  const auto [st, sh, sw] = spec.stride;
  const auto [pt, ph, pw] = spec.padding;

  for (int o = 0; o < spec.out_channels; ++o) {
    double* yo = y.channel(o);
    std::fill(yo, yo + y.plane(), bias[o]);
    for (int c = 0; c < spec.in_channels; ++c) {
      const double* xc = x.channel(c);
      for (int kt = 0; kt < kt_n; ++kt) {
        const auto [t_lo, t_hi] = valid_range(ot_n, x.frames, st, pt, kt);
        for (int kh = 0; kh < kh_n; ++kh) {
          const auto [h_lo, h_hi] = valid_range(oh_n, x.height, sh, ph, kh);
          for (int kw = 0; kw < kw_n; ++kw) {
            const auto [w_lo, w_hi] = valid_range(ow_n, x.width, sw, pw, kw);
            const double wv = weight[(((std::size_t(o) * spec.in_channels + c) * kt_n + kt) * kh_n + kh) * kw_n + kw];
            for (int ot = t_lo; ot < t_hi; ++ot) {
              const int it = ot * st - pt + kt;
              for (int oh = h_lo; oh < h_hi; ++oh) {
                const int ih = oh * sh - ph + kh;
                const std::ptrdiff_t xoff = (std::ptrdiff_t(it) * x.height + ih) * x.width - pw + kw;
                double* yrow = yo + (std::size_t(ot) * oh_n + oh) * ow_n;
                for (int ow = w_lo; ow < w_hi; ++ow) yrow[ow] += wv * xc[xoff + ow * sw];
              }
            }
          }
        }
      }
    }
  }
}

void conv3d_backward(const Conv3dSpec& spec, const Tensor& x, std::span<const double> weight, const Tensor& dy,
                     Tensor* dx, std::span<double> dweight, std::span<double> dbias) {
  check_input(spec, x, weight);
  const auto [ot_n, oh_n, ow_n] = spec.output_extent(x.frames, x.height, x.width);
  if (dy.channels != spec.out_channels || dy.frames != ot_n || dy.height != oh_n || dy.width != ow_n)
    throw std::invalid_argument("conv3d_backward: gradient shape mismatch");
  if (dx) *dx = Tensor(x.channels, x.frames, x.height, x.width);
  const auto [kt_n, kh_n, kw_n] = spec.kernel;
  const auto [st, sh, sw] = spec.stride;
  const auto [pt, ph, pw] = spec.padding;

  for (int o = 0; o < spec.out_channels; ++o) {
    const double* go = dy.channel(o);
    dbias[o] += std::accumulate(go, go + dy.plane(), 0.0);
    for (int c = 0; c < spec.in_channels; ++c) {
      const double* xc = x.channel(c);
      double* dxc = dx ? dx->channel(c) : nullptr;
      for (int kt = 0; kt < kt_n; ++kt) {
        const auto [t_lo, t_hi] = valid_range(ot_n, x.frames, st, pt, kt);
        for (int kh = 0; kh < kh_n; ++kh) {
          const auto [h_lo, h_hi] = valid_range(oh_n, x.height, sh, ph, kh);
          for (int kw = 0; kw < kw_n; ++kw) {
            const auto [w_lo, w_hi] = valid_range(ow_n, x.width, sw, pw, kw);
            const std::size_t widx = (((std::size_t(o) * spec.in_channels + c) * kt_n + kt) * kh_n + kh) * kw_n + kw;
            const double wv = weight[widx];
            double acc = 0.0;
            for (int ot = t_lo; ot < t_hi; ++ot) {
              const int it = ot * st - pt + kt;
              for (int oh = h_lo; oh < h_hi; ++oh) {
                const int ih = oh * sh - ph + kh;
                const std::ptrdiff_t xoff = (std::ptrdiff_t(it) * x.height + ih) * x.width - pw + kw;
                const double* grow = go + (std::size_t(ot) * oh_n + oh) * ow_n;
                for (int ow = w_lo; ow < w_hi; ++ow) acc += grow[ow] * xc[xoff + ow * sw];
                if (dxc)
                  for (int ow = w_lo; ow < w_hi; ++ow) dxc[xoff + ow * sw] += wv * grow[ow];
              }
            }
            dweight[widx] += acc;
          }
        }
      }
    }
  }
}

void silu_inplace(Tensor& x) {
  for (double& v : x.data) v = v * sigmoid(v);
}

void silu_backward(const Tensor& pre, Tensor& grad) {
  for (std::size_t i = 0; i < pre.data.size(); ++i) {
    const double s = sigmoid(pre.data[i]);
    grad.data[i] *= s * (1.0 + pre.data[i] * (1.0 - s));
  }
}

// ---- feature net ----

ConvFeatureNet::ConvFeatureNet(std::vector<Conv3dSpec> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 1; i < layers_.size(); ++i)
    if (layers_[i].in_channels != layers_[i - 1].out_channels)
      throw std::invalid_argument("ConvFeatureNet: channel chain is broken");
}

void ConvFeatureNet::register_parameters(ParameterSet& params, const std::string& prefix) {
  weight_slots_.clear();
  bias_slots_.clear();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string base = prefix + "conv" + std::to_string(i);
    weight_slots_.push_back(params.add(base + ".weight", layers_[i].weight_shape()));
    bias_slots_.push_back(params.add(base + ".bias", {layers_[i].out_channels}));
  }
}

void ConvFeatureNet::initialize(ParameterSet& params, Rng& rng) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& k = layers_[i].kernel;
    const double fan_in = double(layers_[i].in_channels) * k[0] * k[1] * k[2];
    const double stddev = std::sqrt(2.0 / fan_in);
    for (double& w : params[weight_slots_[i]].values) w = rng.normal(0.0, stddev);
    std::fill(params[bias_slots_[i]].values.begin(), params[bias_slots_[i]].values.end(), 0.0);
  }
}

std::vector<double> ConvFeatureNet::forward(const ParameterSet& params, Tensor input, Trace* trace) const {
  if (trace) {
    trace->inputs.clear();
    trace->pre.clear();
  }
  Tensor x = std::move(input);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Tensor y;
    conv3d_forward(layers_[i], x, params[weight_slots_[i]].values, params[bias_slots_[i]].values, y);
    if (trace) {
      trace->inputs.push_back(std::move(x));
      trace->pre.push_back(y);
    }
    silu_inplace(y);
    x = std::move(y);
  }
  std::vector<double> features(x.channels);
  const double inv = 1.0 / static_cast<double>(x.plane());
  for (int c = 0; c < x.channels; ++c) {
    const double* xc = x.channel(c);
    features[c] = std::accumulate(xc, xc + x.plane(), 0.0) * inv;
  }
  return features;
}

void ConvFeatureNet::backward(const ParameterSet& params, const Trace& trace, std::span<const double> dfeatures,
                              ParameterSet& grads) const {
  if (trace.pre.size() != layers_.size()) throw std::invalid_argument("ConvFeatureNet::backward: missing trace");
  const Tensor& last = trace.pre.back();
  Tensor grad(last.channels, last.frames, last.height, last.width);
  const double inv = 1.0 / static_cast<double>(last.plane());
  for (int c = 0; c < last.channels; ++c) std::fill(grad.channel(c), grad.channel(c) + grad.plane(), dfeatures[c] * inv);

  for (std::size_t li = layers_.size(); li-- > 0;) {
    silu_backward(trace.pre[li], grad);
    Tensor dx;
    conv3d_backward(layers_[li], trace.inputs[li], params[weight_slots_[li]].values, grad, li > 0 ? &dx : nullptr,
                    grads[weight_slots_[li]].values, grads[bias_slots_[li]].values);
    grad = std::move(dx);
  }
}

}  // namespace forgery::nn
