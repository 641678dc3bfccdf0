#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace forgery {

/// Interleaved H×W×3 RGB image with float channels nominally in [0,1].
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int height, int width, float fill = 0.0f);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  float& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  float at(int y, int x, int c) const { return data_[index(y, x, c)]; }

  std::span<float> pixels() { return data_; }
  std::span<const float> pixels() const { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

Image flip_horizontal(const Image& img);

/// Bilinear resample of the continuous region [x, x+w)×[y, y+h) onto an out_h×out_w grid.
/// Pixel centers sit at half-integers; samples outside the image clamp to the border.
Image crop_resize(const Image& img, double x, double y, double w, double h, int out_h, int out_w);

/// Bilinear resize; the identity when the size is unchanged.
Image resize_bilinear(const Image& img, int out_h, int out_w);

void clamp_unit(Image& img);

/// Luma (BT.601) of one pixel.
inline float luma(const Image& img, int y, int x) {
  return 0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) + 0.114f * img.at(y, x, 2);
}

double mean_abs_difference(const Image& a, const Image& b);
double psnr(const Image& a, const Image& b);

// 8-bit codecs, backed by OpenCV. Throw IoError on failure.
Image load_image(const std::filesystem::path& path);
void save_png(const Image& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality);
Image decode_image(std::span<const std::uint8_t> bytes);

}  // namespace forgery
