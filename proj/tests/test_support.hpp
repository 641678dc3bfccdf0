#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <span>
#include <string>

#include <unistd.h>

#include "forgery/image.hpp"
#include "forgery/models.hpp"
#include "forgery/rng.hpp"

namespace forgery::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("forgery_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Image random_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w);
  for (auto& v : img.pixels()) v = static_cast<float>(rng.uniform());
  return img;
}

/// Smooth colour gradient with a few edges; stands in for a natural image.
inline Image gradient_image(int h, int w) {
  Image img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(y, x, 0) = static_cast<float>(x) / w;
      img.at(y, x, 1) = static_cast<float>(y) / h;
      img.at(y, x, 2) = ((x / 8 + y / 8) % 2) ? 0.8f : 0.2f;
    }
  return img;
}

/// Scores a face by its mean red channel scaled into (0,1); deterministic and
/// distinguishable per image, so compositions can be checked exactly.
class MeanChannelScorer final : public ImageScorer {
 public:
  MeanChannelScorer(int channel, double scale) : channel_(channel), scale_(scale) {}
  double score(const Image& face) const override {
    double s = 0;
    for (int y = 0; y < face.height(); ++y)
      for (int x = 0; x < face.width(); ++x) s += face.at(y, x, channel_) * (1.0 + 0.01 * x);
    return scale_ * s / (face.height() * face.width() * 1.5);
  }

 private:
  int channel_;
  double scale_;
};

class ConstantSequenceScorer final : public SequenceScorer {
 public:
  explicit ConstantSequenceScorer(double value) : value_(value) {}
  double score(std::span<const Image> faces) const override { return faces.empty() ? 0.5 : value_; }

 private:
  double value_;
};

}  // namespace forgery::testing

#include <algorithm>
#include <cmath>

#include "forgery/nn.hpp"

namespace forgery::testing {

/// Relative error with a floor on the denominator so that vanishing gradients compare
/// by absolute difference.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Largest relative error between `analytic` and central differences of `loss` over
/// `coords` randomly chosen parameter coordinates. `loss` reads `params` in place.
template <class Loss>
double gradient_check(nn::ParameterSet& params, const nn::ParameterSet& analytic, Loss&& loss, Rng& rng,
                      int coords, double h = 1e-5) {
  double worst = 0;
  for (int k = 0; k < coords; ++k) {
    const std::size_t a = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(params.size()) - 1));
    auto& values = params[a].values;
    const std::size_t i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(values.size()) - 1));
    const double saved = values[i];
    values[i] = saved + h;
    const double up = loss();
    values[i] = saved - h;
    const double down = loss();
    values[i] = saved;
    worst = std::max(worst, relative_error(analytic[a].values[i], (up - down) / (2 * h)));
  }
  return worst;
}

}  // namespace forgery::testing
