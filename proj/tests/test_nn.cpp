#include <gtest/gtest.h>

#include "forgery/nn.hpp"
#include "test_support.hpp"

using namespace forgery;
using namespace forgery::nn;
using forgery::testing::relative_error;

namespace {

Tensor random_tensor(int c, int t, int h, int w, Rng& rng) {
  Tensor x(c, t, h, w);
  for (double& v : x.data) v = rng.normal(0, 1);
  return x;
}

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal(0, 0.5);
  return v;
}

double weighted_sum(const Tensor& y, const std::vector<double>& r) {
  double s = 0;
  for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * r[i];
  return s;
}

}  // namespace

TEST(Conv3d, OutputExtent) {
  Conv3dSpec s;
  s.kernel = {3, 3, 3};
  s.stride = {2, 2, 1};
  s.padding = {1, 1, 0};
  EXPECT_EQ(s.output_extent(8, 9, 5), (std::array<int, 3>{4, 5, 3}));
  EXPECT_THROW(s.output_extent(1, 1, 2), std::invalid_argument);
}

TEST(Conv3d, MatchesDirectSum) {
  Rng rng(3);
  Conv3dSpec s;
  s.in_channels = 2;
  s.out_channels = 3;
  s.kernel = {2, 3, 3};
  s.stride = {1, 2, 2};
  s.padding = {0, 1, 1};
  const Tensor x = random_tensor(2, 3, 7, 6, rng);
  const auto w = random_values(element_count(s.weight_shape()), rng);
  const auto b = random_values(3, rng);
  Tensor y;
  conv3d_forward(s, x, w, b, y);
  const auto ext = s.output_extent(3, 7, 6);
  ASSERT_EQ(y.frames, ext[0]);
  for (int o = 0; o < 3; ++o)
    for (int t = 0; t < ext[0]; ++t)
      for (int i = 0; i < ext[1]; ++i)
        for (int j = 0; j < ext[2]; ++j) {
          double acc = b[o];
          for (int c = 0; c < 2; ++c)
            for (int kt = 0; kt < 2; ++kt)
              for (int ki = 0; ki < 3; ++ki)
                for (int kj = 0; kj < 3; ++kj) {
                  const int tt = t + kt, ii = 2 * i - 1 + ki, jj = 2 * j - 1 + kj;
                  if (ii < 0 || ii >= 7 || jj < 0 || jj >= 6) continue;
                  acc += w[(((o * 2 + c) * 2 + kt) * 3 + ki) * 3 + kj] * x.channel(c)[(tt * 7 + ii) * 6 + jj];
                }
          EXPECT_NEAR(y.channel(o)[(t * ext[1] + i) * ext[2] + j], acc, 1e-12);
        }
}

TEST(Conv3d, BackwardMatchesFiniteDifferences) {
  Rng rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    Conv3dSpec s;
    s.in_channels = 2;
    s.out_channels = 2;
    s.kernel = {trial % 2 ? 3 : 1, 3, 3};
    s.stride = {1 + trial % 2, 1 + trial / 2, 2};
    s.padding = {trial % 2, 1, trial / 2};
    Tensor x = random_tensor(2, 4, 6, 7, rng);
    auto w = random_values(element_count(s.weight_shape()), rng);
    auto b = random_values(2, rng);
    Tensor y;
    conv3d_forward(s, x, w, b, y);
    const auto r = random_values(y.data.size(), rng);
    Tensor dy = y;
    dy.data = r;
    Tensor dx;
    std::vector<double> dw(w.size()), db(b.size());
    conv3d_backward(s, x, w, dy, &dx, dw, db);

    auto loss = [&] {
      Tensor out;
      conv3d_forward(s, x, w, b, out);
      return weighted_sum(out, r);
    };
    const double h = 1e-6;
    for (std::size_t i = 0; i < w.size(); i += 3) {
      const double saved = w[i];
      w[i] = saved + h;
      const double up = loss();
      w[i] = saved - h;
      const double down = loss();
      w[i] = saved;
      EXPECT_LT(relative_error(dw[i], (up - down) / (2 * h)), 1e-5);
    }
    for (std::size_t i = 0; i < x.data.size(); i += 5) {
      const double saved = x.data[i];
      x.data[i] = saved + h;
      const double up = loss();
      x.data[i] = saved - h;
      const double down = loss();
      x.data[i] = saved;
      EXPECT_LT(relative_error(dx.data[i], (up - down) / (2 * h)), 1e-5);
    }
    double bsum = 0;
    for (std::size_t i = 0; i < y.data.size() / 2; ++i) bsum += r[i];
    EXPECT_NEAR(db[0], bsum, 1e-9);
  }
}

TEST(Silu, BackwardMatchesDerivative) {
  Tensor pre(1, 1, 1, 5);
  pre.data = {-3, -0.5, 0, 0.7, 4};
  Tensor grad = pre;
  grad.data.assign(5, 1.0);
  silu_backward(pre, grad);
  for (int i = 0; i < 5; ++i) {
    const double z = pre.data[i], h = 1e-6;
    auto f = [](double v) { return v * sigmoid(v); };
    EXPECT_NEAR(grad.data[i], (f(z + h) - f(z - h)) / (2 * h), 1e-8);
  }
  Tensor act = pre;
  silu_inplace(act);
  EXPECT_NEAR(act.data[3], 0.7 * sigmoid(0.7), 1e-15);
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_EQ(sigmoid(-1000), 0.0);
  EXPECT_EQ(sigmoid(1000), 1.0);
  EXPECT_DOUBLE_EQ(sigmoid(0), 0.5);
}

TEST(ParameterSet, FlattenAssignAndLookup) {
  ParameterSet p;
  p.add("a", {2, 3});
  p.add("b", {4});
  EXPECT_EQ(p.total_elements(), 10u);
  std::vector<double> flat(10);
  for (int i = 0; i < 10; ++i) flat[i] = i;
  p.assign_flat(flat);
  EXPECT_EQ(p.flatten(), flat);
  EXPECT_EQ(p.at("b").values[0], 6);
  EXPECT_EQ(p.find("zzz"), nullptr);
  EXPECT_THROW(p.at("zzz"), std::out_of_range);
  ParameterSet z = p.zeros_like();
  EXPECT_EQ(z.total_elements(), 10u);
  EXPECT_EQ(z.at("a").values[5], 0.0);
  p.scale(2);
  EXPECT_EQ(p.at("a").values[1], 2.0);
}

TEST(ConvFeatureNet, GradientMatchesFiniteDifferences) {
  Conv3dSpec a;
  a.in_channels = 3;
  a.out_channels = 4;
  a.kernel = {1, 3, 3};
  a.stride = {1, 2, 2};
  a.padding = {0, 1, 1};
  Conv3dSpec b = a;
  b.in_channels = 4;
  b.out_channels = 5;
  b.kernel = {3, 1, 1};
  b.stride = {2, 1, 1};
  b.padding = {1, 0, 0};
  ConvFeatureNet net({a, b});
  ParameterSet params;
  net.register_parameters(params, "trunk.");
  Rng rng(5);
  net.initialize(params, rng);
  EXPECT_NE(params.find("trunk.conv0.weight"), nullptr);
  EXPECT_NE(params.find("trunk.conv1.bias"), nullptr);
  const Tensor x = random_tensor(3, 4, 8, 8, rng);
  const auto r = random_values(5, rng);

  ConvFeatureNet::Trace trace;
  const auto feat = net.forward(params, x, &trace);
  ASSERT_EQ(feat.size(), 5u);
  ParameterSet grads = params.zeros_like();
  net.backward(params, trace, r, grads);
  auto loss = [&] {
    const auto f = net.forward(params, x, nullptr);
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * r[i];
    return s;
  };
  EXPECT_LT(forgery::testing::gradient_check(params, grads, loss, rng, 60), 1e-5);
}
