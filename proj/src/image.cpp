#include "forgery/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "forgery/errors.hpp"

namespace forgery {

Image::Image(int height, int width, float fill) : height_(height), width_(width) {
  if (height < 0 || width < 0) throw std::invalid_argument("image extents must be nonnegative");
  data_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

Image flip_horizontal(const Image& img) {
  Image out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < Image::kChannels; ++c) out.at(y, img.width() - 1 - x, c) = img.at(y, x, c);
  return out;
}

Image crop_resize(const Image& img, double x, double y, double w, double h, int out_h, int out_w) {
  if (img.empty()) throw std::invalid_argument("crop_resize: empty image");
  if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("crop_resize: output size must be positive");
  if (w <= 0 || h <= 0) throw std::invalid_argument("crop_resize: region must have positive extent");

  const double sx = w / out_w;
  const double sy = h / out_h;
  const int max_x = img.width() - 1;
  const int max_y = img.height() - 1;

  // Horizontal taps are shared by every row.
  std::vector<int> x0(out_w), x1(out_w);
  std::vector<float> fx(out_w);
  for (int ox = 0; ox < out_w; ++ox) {
    double src = x + (ox + 0.5) * sx - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(max_x));
    const int lo = static_cast<int>(std::floor(src));
    x0[ox] = lo;
    x1[ox] = std::min(lo + 1, max_x);
    fx[ox] = static_cast<float>(src - lo);
  }

  Image out(out_h, out_w);
  for (int oy = 0; oy < out_h; ++oy) {
    double src = y + (oy + 0.5) * sy - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(max_y));
    const int y0 = static_cast<int>(std::floor(src));
    const int y1 = std::min(y0 + 1, max_y);
    const float fy = static_cast<float>(src - y0);
    for (int ox = 0; ox < out_w; ++ox) {
      for (int c = 0; c < Image::kChannels; ++c) {
        const float top = img.at(y0, x0[ox], c) * (1.0f - fx[ox]) + img.at(y0, x1[ox], c) * fx[ox];
        const float bottom = img.at(y1, x0[ox], c) * (1.0f - fx[ox]) + img.at(y1, x1[ox], c) * fx[ox];
        out.at(oy, ox, c) = top * (1.0f - fy) + bottom * fy;
      }
    }
  }
  return out;
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
  if (img.height() == out_h && img.width() == out_w) return img;
  return crop_resize(img, 0.0, 0.0, img.width(), img.height(), out_h, out_w);
}

void clamp_unit(Image& img) {
  for (float& v : img.pixels()) v = std::clamp(v, 0.0f, 1.0f);
}

double mean_abs_difference(const Image& a, const Image& b) {
  if (a.height() != b.height() || a.width() != b.width())
    throw std::invalid_argument("mean_abs_difference: shape mismatch");
  if (a.empty()) return 0.0;
  double sum = 0.0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) sum += std::abs(static_cast<double>(pa[i]) - pb[i]);
  return sum / static_cast<double>(pa.size());
}

double psnr(const Image& a, const Image& b) {
  if (a.height() != b.height() || a.width() != b.width()) throw std::invalid_argument("psnr: shape mismatch");
  double sse = 0.0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = static_cast<double>(pa[i]) - pb[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(pa.size());
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

cv::Mat to_bgr8(const Image& img) {
  cv::Mat mat(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(img.at(y, x, c), 0.0f, 1.0f);
        row[x][2 - c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
  }
  return mat;
}

Image from_bgr8(const cv::Mat& mat) {
  cv::Mat bgr;
  if (mat.channels() == 1) {
    cv::Mat tmp;
    cv::merge(std::vector<cv::Mat>{mat, mat, mat}, tmp);
    bgr = tmp;
  } else {
    bgr = mat;
  }
  Image img(bgr.rows, bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = row[x][2 - c] / 255.0f;
  }
  return img;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (mat.empty()) throw IoError("cannot read image: " + path.string());
  return from_bgr8(mat);
}

void save_png(const Image& img, const std::filesystem::path& path) {
  // Fixed compression level keeps output bytes reproducible.
  if (!cv::imwrite(path.string(), to_bgr8(img), {cv::IMWRITE_PNG_COMPRESSION, 3}))
    throw IoError("cannot write image: " + path.string());
}

std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality) {
  if (quality < 0 || quality > 100) throw std::invalid_argument("jpeg quality must be in [0,100]");
  std::vector<std::uint8_t> bytes;
  if (!cv::imencode(".jpg", to_bgr8(img), bytes, {cv::IMWRITE_JPEG_QUALITY, quality}))
    throw IoError("jpeg encode failed");
  return bytes;
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat mat = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (mat.empty()) throw IoError("image decode failed");
  return from_bgr8(mat);
}

}  // namespace forgery
