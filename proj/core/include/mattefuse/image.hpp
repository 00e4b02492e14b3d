#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mattefuse {

// Interleaved (HWC) row-major floating-point image. Samples are doubles
// with a nominal range of [0,1]; the channel count is 1 or 3.
class ImageF {
 public:
  ImageF() = default;
  ImageF(int width, int height, int channels, double fill = 0.0);

  static ImageF from_data(int width, int height, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<double> data() & noexcept { return data_; }
  std::span<const double> data() const& noexcept { return data_; }
  // Spans into a temporary would dangle.
  std::span<const double> data() const&& = delete;

  std::span<double> row(int y);
  std::span<const double> row(int y) const;

  bool same_shape(const ImageF& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }
  bool same_size(const ImageF& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  friend bool operator==(const ImageF&, const ImageF&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Channel-mean grayscale. Single-channel input is returned unchanged.
ImageF to_grayscale(const ImageF& img);

// Replicates a single-channel image into `channels` identical channels.
ImageF broadcast_channels(const ImageF& gray, int channels);

ImageF extract_channel(const ImageF& img, int channel);

// Elementwise helpers used across the pipeline. All require equal shapes.
ImageF multiply_by_matte(const ImageF& color, const ImageF& matte);
double max_abs_diff(const ImageF& a, const ImageF& b);
bool all_finite(const ImageF& img);
void clamp01(ImageF& img);

// Throws ArgumentError naming `what` when the shapes differ.
void require_same_shape(const ImageF& a, const ImageF& b, const char* what);
void require_same_size(const ImageF& a, const ImageF& b, const char* what);
void require_single_channel(const ImageF& img, const char* what);

}  // namespace mattefuse
