#include "mattefuse/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mattefuse/errors.hpp"

namespace mattefuse {

namespace {

void check_dims(int width, int height, int channels) {
  if (width <= 0 || height <= 0) {
    throw ArgumentError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw ArgumentError("image channel count must be 1 or 3, got " + std::to_string(channels));
  }
}

std::string shape_string(const ImageF& img) {
  return std::to_string(img.width()) + "x" + std::to_string(img.height()) + "x" +
         std::to_string(img.channels());
}

}  // namespace

ImageF::ImageF(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                   static_cast<std::size_t>(channels),
               fill);
}

ImageF ImageF::from_data(int width, int height, int channels, std::vector<double> data) {
  check_dims(width, height, channels);
  const std::size_t expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                               static_cast<std::size_t>(channels);
  if (data.size() != expected) {
    throw ArgumentError("image data length " + std::to_string(data.size()) + " does not match " +
                        std::to_string(expected));
  }
  ImageF img;
  img.width_ = width;
  img.height_ = height;
  img.channels_ = channels;
  img.data_ = std::move(data);
  return img;
}

std::span<double> ImageF::row(int y) {
  const std::size_t stride = static_cast<std::size_t>(width_) * static_cast<std::size_t>(channels_);
  return std::span<double>(data_).subspan(static_cast<std::size_t>(y) * stride, stride);
}

std::span<const double> ImageF::row(int y) const {
  const std::size_t stride = static_cast<std::size_t>(width_) * static_cast<std::size_t>(channels_);
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(y) * stride, stride);
}

ImageF to_grayscale(const ImageF& img) {
  if (img.channels() == 1) return img;
  ImageF out(img.width(), img.height(), 1);
  const auto src = img.data();
  auto dst = out.data();
  const int ch = img.channels();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    double sum = 0.0;
    for (int c = 0; c < ch; ++c) sum += src[p * static_cast<std::size_t>(ch) + static_cast<std::size_t>(c)];
    dst[p] = sum / ch;
  }
  return out;
}

ImageF broadcast_channels(const ImageF& gray, int channels) {
  require_single_channel(gray, "broadcast_channels input");
  if (channels == 1) return gray;
  ImageF out(gray.width(), gray.height(), channels);
  const auto src = gray.data();
  auto dst = out.data();
  for (std::size_t p = 0; p < src.size(); ++p) {
    for (int c = 0; c < channels; ++c) dst[p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)] = src[p];
  }
  return out;
}

ImageF extract_channel(const ImageF& img, int channel) {
  if (channel < 0 || channel >= img.channels()) {
    throw ArgumentError("channel index out of range");
  }
  ImageF out(img.width(), img.height(), 1);
  const auto src = img.data();
  auto dst = out.data();
  const auto ch = static_cast<std::size_t>(img.channels());
  for (std::size_t p = 0; p < dst.size(); ++p) dst[p] = src[p * ch + static_cast<std::size_t>(channel)];
  return out;
}

ImageF multiply_by_matte(const ImageF& color, const ImageF& matte) {
  require_same_size(color, matte, "multiply_by_matte");
  require_single_channel(matte, "matte");
  ImageF out = color;
  auto dst = out.data();
  const auto m = matte.data();
  const auto ch = static_cast<std::size_t>(color.channels());
  for (std::size_t p = 0; p < m.size(); ++p) {
    for (std::size_t c = 0; c < ch; ++c) dst[p * ch + c] *= m[p];
  }
  return out;
}

double max_abs_diff(const ImageF& a, const ImageF& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) worst = std::max(worst, std::abs(da[i] - db[i]));
  return worst;
}

bool all_finite(const ImageF& img) {
  return std::all_of(img.data().begin(), img.data().end(), [](double v) { return std::isfinite(v); });
}

void clamp01(ImageF& img) {
  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
}

void require_same_shape(const ImageF& a, const ImageF& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ArgumentError(std::string(what) + ": shape mismatch (" + shape_string(a) + " vs " +
                        shape_string(b) + ")");
  }
}

void require_same_size(const ImageF& a, const ImageF& b, const char* what) {
  if (!a.same_size(b)) {
    throw ArgumentError(std::string(what) + ": size mismatch (" + shape_string(a) + " vs " +
                        shape_string(b) + ")");
  }
}

void require_single_channel(const ImageF& img, const char* what) {
  if (img.channels() != 1) {
    throw ArgumentError(std::string(what) + " must be single-channel, got " +
                        std::to_string(img.channels()) + " channels");
  }
}

}  // namespace mattefuse
